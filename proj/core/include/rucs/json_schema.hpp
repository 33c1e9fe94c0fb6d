#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rucs {

// Validator for the JSON Schema subset used by property result and action
// payload schemas: type, enum, const, required, properties,
// additionalProperties (boolean), items, minimum, maximum.
// Unrecognised keywords are ignored.
class JsonSchema {
 public:
  JsonSchema() = default;
  explicit JsonSchema(nlohmann::json document) : document_(std::move(document)) {}

  [[nodiscard]] const nlohmann::json& document() const noexcept { return document_; }

  // Returns one message per violation; empty means valid.
  [[nodiscard]] std::vector<std::string> validate(const nlohmann::json& value) const;
  [[nodiscard]] bool is_valid(const nlohmann::json& value) const { return validate(value).empty(); }

 private:
  nlohmann::json document_ = nlohmann::json::object();
};

}  // namespace rucs
