#pragma once

#include <map>
#include <string>
#include <vector>

#include "rucs/domain.hpp"
#include "rucs/json_schema.hpp"
#include "rucs/result.hpp"

namespace rucs {

enum class CatalogKind { property, action };

struct CatalogEntry {
  std::string name;
  CatalogKind kind = CatalogKind::property;
  // Name of the handler the entry is bound to.
  std::string handler;
  // Run on the deferred worker pool instead of inline.
  bool deferred = false;
  // Other users may only request the name when the target vehicle exposes it.
  bool requires_exposure = true;
  // Property: schema of the computed value. Action: schema of the request payload.
  JsonSchema schema;
  // Action only: schema of the target's response payload.
  JsonSchema response_schema;
};

// Registry of requestable names. Populate before sharing; lookups are
// then safe from any thread.
class Catalog {
 public:
  // drowsiness, automation_level and yield_request.
  static Catalog with_defaults();

  Status add(CatalogEntry entry);

  [[nodiscard]] Expected<CatalogEntry> lookup(std::string_view name) const;
  [[nodiscard]] bool has_property(std::string_view name) const;
  [[nodiscard]] bool has_action(std::string_view name) const;
  [[nodiscard]] std::vector<std::string> names(CatalogKind kind) const;

 private:
  std::map<std::string, CatalogEntry, std::less<>> entries_;
};

namespace schemas {
nlohmann::json drowsiness_result();
nlohmann::json automation_level_result();
nlohmann::json yield_request_payload();
nlohmann::json yield_request_response();
}  // namespace schemas

}  // namespace rucs
