#include "rucs/json_schema.hpp"

namespace rucs {

namespace {

using nlohmann::json;

bool matches_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  return false;
}

void check(const json& schema, const json& value, const std::string& path,
           std::vector<std::string>& errors) {
  if (!schema.is_object()) return;

  if (const auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = matches_type(value, it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& t : *it) ok = ok || (t.is_string() && matches_type(value, t.get<std::string>()));
    }
    if (!ok) {
      errors.push_back(path + ": expected type " + it->dump());
      return;
    }
  }

  if (const auto it = schema.find("const"); it != schema.end() && *it != value) {
    errors.push_back(path + ": expected " + it->dump());
  }

  if (const auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
    bool found = false;
    for (const auto& candidate : *it) found = found || candidate == value;
    if (!found) errors.push_back(path + ": " + value.dump() + " not in " + it->dump());
  }

  if (value.is_number()) {
    const double v = value.get<double>();
    if (const auto it = schema.find("minimum"); it != schema.end() && v < it->get<double>()) {
      errors.push_back(path + ": below minimum " + it->dump());
    }
    if (const auto it = schema.find("maximum"); it != schema.end() && v > it->get<double>()) {
      errors.push_back(path + ": above maximum " + it->dump());
    }
  }

  if (value.is_object()) {
    if (const auto it = schema.find("required"); it != schema.end() && it->is_array()) {
      for (const auto& key : *it) {
        if (!value.contains(key.get<std::string>())) {
          errors.push_back(path + ": missing required '" + key.get<std::string>() + "'");
        }
      }
    }
    const auto props = schema.find("properties");
    const auto additional = schema.find("additionalProperties");
    for (const auto& [key, member] : value.items()) {
      if (props != schema.end() && props->contains(key)) {
        check(props->at(key), member, path + "." + key, errors);
      } else if (additional != schema.end() && additional->is_boolean() && !additional->get<bool>()) {
        errors.push_back(path + ": unexpected property '" + key + "'");
      }
    }
  }

  if (value.is_array()) {
    if (const auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        check(*it, value[i], path + "[" + std::to_string(i) + "]", errors);
      }
    }
  }
}

}  // namespace

std::vector<std::string> JsonSchema::validate(const nlohmann::json& value) const {
  std::vector<std::string> errors;
  check(document_, value, "$", errors);
  return errors;
}

}  // namespace rucs
