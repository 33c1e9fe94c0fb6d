#include "rucs/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace rucs {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) it->get_to(out);
}

}  // namespace

Expected<ServiceConfig> config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"bind_address",      "port",           "data_dir",
                                           "default_radius_m",  "default_max_age_s", "action_timeout_s",
                                           "topic_cache_ttl_s", "deferred_workers", "subscriber_queue",
                                           "http_threads",      "processing_delay_ms"};
  if (!j.is_object()) return make_error(ErrorCode::bad_request, "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) return make_error(ErrorCode::bad_request, "unknown config key '" + key + "'");
  }
  ServiceConfig c;
  try {
    read(j, "bind_address", c.bind_address);
    read(j, "port", c.port);
    if (const auto it = j.find("data_dir"); it != j.end() && !it->is_null()) {
      const auto dir = it->get<std::string>();
      if (!dir.empty()) c.data_dir = dir;
    }
    read(j, "default_radius_m", c.default_radius_m);
    read(j, "default_max_age_s", c.default_max_age_s);
    read(j, "action_timeout_s", c.action_timeout_s);
    read(j, "topic_cache_ttl_s", c.topic_cache_ttl_s);
    read(j, "deferred_workers", c.deferred_workers);
    read(j, "subscriber_queue", c.subscriber_queue);
    read(j, "http_threads", c.http_threads);
    read(j, "processing_delay_ms", c.processing_delay_ms);
  } catch (const nlohmann::json::exception& e) {
    return make_error(ErrorCode::bad_request, std::string("config: ") + e.what());
  }
  if (c.port < 0 || c.port > 65535) return make_error(ErrorCode::bad_request, "port out of range");
  if (c.default_radius_m <= 0 || c.default_max_age_s <= 0 || c.topic_cache_ttl_s <= 0) {
    return make_error(ErrorCode::bad_request, "radius, max age and cache ttl must be > 0");
  }
  if (c.action_timeout_s <= 0 || c.action_timeout_s > 30) {
    return make_error(ErrorCode::bad_request, "action_timeout_s must be in (0, 30]");
  }
  if (c.http_threads == 0) return make_error(ErrorCode::bad_request, "http_threads must be > 0");
  return c;
}

Expected<ServiceConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::not_found, "cannot open config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    return make_error(ErrorCode::bad_request, path.string() + ": " + e.what());
  }
}

nlohmann::json config_to_json(const ServiceConfig& c) {
  return nlohmann::json{{"bind_address", c.bind_address},
                        {"port", c.port},
                        {"data_dir", c.data_dir ? c.data_dir->string() : std::string{}},
                        {"default_radius_m", c.default_radius_m},
                        {"default_max_age_s", c.default_max_age_s},
                        {"action_timeout_s", c.action_timeout_s},
                        {"topic_cache_ttl_s", c.topic_cache_ttl_s},
                        {"deferred_workers", c.deferred_workers},
                        {"subscriber_queue", c.subscriber_queue},
                        {"http_threads", c.http_threads},
                        {"processing_delay_ms", c.processing_delay_ms}};
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& cli_path) {
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return cli_path;
}

}  // namespace rucs
