#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rucs/result.hpp"
#include "rucs/sim/decision.hpp"
#include "rucs/sim/scenario.hpp"

namespace rucs::sim {

struct RunOptions {
  std::string url;
  std::uint64_t seed = 1;
  std::filesystem::path out;
  // Health probes before giving up with ServiceUnreachable.
  int health_attempts = 3;
};

struct DecisionRecord {
  std::string vehicle;
  std::string target;
  double t_s = 0.0;
  nlohmann::json result;
  LaneChangeDecision decision = LaneChangeDecision::decelerate_and_change_behind;
};

struct RunSummary {
  std::filesystem::path dir;
  std::size_t requests = 0;
  std::size_t errors = 0;
  nlohmann::json counts;
  std::vector<DecisionRecord> decisions;
  // action name -> replies that reached the requester
  std::map<std::string, std::vector<nlohmann::json>> action_replies;
  double wall_s = 0.0;
};

// Files written into the run directory.
inline constexpr const char* kRunFile = "run.json";
inline constexpr const char* kLatencyFile = "latency.csv";
inline constexpr const char* kRequestsFile = "requests.csv";
inline constexpr const char* kCountsFile = "counts.json";
inline constexpr const char* kTracesFile = "traces.csv";
inline constexpr const char* kDecisionsFile = "decisions.jsonl";
inline constexpr const char* kErrorsFile = "errors.log";

// Drives every vehicle of the scenario against the service at options.url
// and writes the logs. Request-level failures are logged and counted, not
// fatal; the run itself fails only for an invalid scenario, an unreachable
// service or an unwritable run directory.
Expected<RunSummary> run_scenario(const ScenarioConfig& config, const RunOptions& options);

}  // namespace rucs::sim
