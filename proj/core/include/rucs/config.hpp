#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rucs/result.hpp"

namespace rucs {

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  // Empty keeps state logs in memory only.
  std::optional<std::filesystem::path> data_dir;
  double default_radius_m = 300.0;
  double default_max_age_s = 10.0;
  double action_timeout_s = 5.0;
  double topic_cache_ttl_s = 300.0;
  std::size_t deferred_workers = 2;
  std::size_t subscriber_queue = 1024;
  std::size_t http_threads = 64;
  // Artificial per-request service time, for latency pipeline tests.
  double processing_delay_ms = 0.0;
};

inline constexpr const char* kConfigEnvVar = "RUCS_CONFIG";

// Unknown keys are rejected so typos surface early.
Expected<ServiceConfig> config_from_json(const nlohmann::json& j);
Expected<ServiceConfig> load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ServiceConfig& config);

// RUCS_CONFIG wins over the path given on the command line.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& cli_path);

}  // namespace rucs
