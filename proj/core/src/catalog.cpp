#include "rucs/catalog.hpp"

namespace rucs {

namespace schemas {

nlohmann::json drowsiness_result() {
  return nlohmann::json::parse(R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "drowsiness",
  "type": "object",
  "required": ["level", "binary"],
  "properties": {
    "level": {"type": "string", "enum": ["none", "low", "medium", "high"]},
    "binary": {"type": "string", "enum": ["drowsy", "non-drowsy"]},
    "measured_at": {"type": "string"}
  },
  "additionalProperties": false
})");
}

nlohmann::json automation_level_result() {
  return nlohmann::json::parse(R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "automation_level",
  "type": "object",
  "required": ["level"],
  "properties": {
    "level": {"type": "string", "enum": ["manual", "assisted", "autonomous"]},
    "lane_change_intent": {"type": "string", "enum": ["none", "left", "right"]}
  },
  "additionalProperties": false
})");
}

nlohmann::json yield_request_payload() {
  return nlohmann::json::parse(R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "yield_request",
  "type": "object",
  "properties": {
    "side": {"type": "string", "enum": ["left", "right"]},
    "note": {"type": "string"}
  },
  "additionalProperties": false
})");
}

nlohmann::json yield_request_response() {
  return nlohmann::json::parse(R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "yield_request response",
  "type": "object",
  "required": ["decision"],
  "properties": {
    "decision": {"type": "string", "enum": ["accept", "decline"]}
  },
  "additionalProperties": false
})");
}

}  // namespace schemas

Catalog Catalog::with_defaults() {
  Catalog c;
  c.add({"drowsiness", CatalogKind::property, "drowsiness", false, true,
         JsonSchema{schemas::drowsiness_result()}, {}});
  c.add({"automation_level", CatalogKind::property, "automation_level", false, true,
         JsonSchema{schemas::automation_level_result()}, {}});
  c.add({"yield_request", CatalogKind::action, "forward", false, true,
         JsonSchema{schemas::yield_request_payload()},
         JsonSchema{schemas::yield_request_response()}});
  return c;
}

Status Catalog::add(CatalogEntry entry) {
  if (entry.name.empty()) return make_error(ErrorCode::bad_request, "catalog name must not be empty");
  auto [it, inserted] = entries_.try_emplace(entry.name, entry);
  if (!inserted) return make_error(ErrorCode::bad_request, "duplicate catalog name: " + entry.name);
  return ok();
}

Expected<CatalogEntry> Catalog::lookup(std::string_view name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    return make_error(ErrorCode::not_found, "no catalog entry '" + std::string(name) + "'");
  }
  return it->second;
}

bool Catalog::has_property(std::string_view name) const {
  const auto it = entries_.find(name);
  return it != entries_.end() && it->second.kind == CatalogKind::property;
}

bool Catalog::has_action(std::string_view name) const {
  const auto it = entries_.find(name);
  return it != entries_.end() && it->second.kind == CatalogKind::action;
}

std::vector<std::string> Catalog::names(CatalogKind kind) const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) {
    if (entry.kind == kind) out.push_back(name);
  }
  return out;
}

}  // namespace rucs
