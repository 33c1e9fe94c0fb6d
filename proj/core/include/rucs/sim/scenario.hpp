#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rucs/domain.hpp"
#include "rucs/result.hpp"
#include "rucs/sim/trace.hpp"

namespace rucs::sim {

enum class Role { autonomous, manual };

std::string_view to_string(Role r);

// Drowsiness reported from `from_s` (scenario time) on, until the next step.
struct DrowsinessStep {
  double from_s = 0.0;
  Drowsiness level = Drowsiness::none;
};

struct VehicleSpec {
  std::string label;
  Role role = Role::manual;
  Trace trace;
  std::vector<DrowsinessStep> drowsiness;
  std::set<std::string> exposed_properties;
  std::set<std::string> exposed_actions;
  // Reply sent to incoming action requests; unset means ignore them.
  std::optional<std::string> action_reply;
};

enum class RequestKind { property, action };
enum class Trigger { first_neighbor, periodic };

struct ScriptedRequest {
  std::string from;
  std::string to;
  RequestKind kind = RequestKind::property;
  std::string name;
  Trigger trigger = Trigger::first_neighbor;
  double every_s = 0.0;
  double start_s = 0.0;
  // Feed the result into the lane-change decision and start the maneuver.
  bool decide_lane_change = false;
  nlohmann::json payload = nlohmann::json::object();
  double timeout_s = 5.0;
};

struct LatencyProfile {
  double fixed_ms = 0.0;
  double jitter_ms = 0.0;
};

struct ScenarioConfig {
  std::string name = "custom";
  double duration_s = 0.0;
  // Scenario seconds per wall-clock second.
  double time_scale = 1.0;
  double state_period_s = 1.0;
  double neighbor_period_s = 1.0;
  double neighbor_radius_m = 300.0;
  LatencyProfile latency;
  double analysis_speed_mps = 50.0 / 3.6;
  std::vector<VehicleSpec> vehicles;
  std::vector<ScriptedRequest> requests;

  [[nodiscard]] const VehicleSpec* vehicle(std::string_view label) const;
};

inline constexpr LatencyProfile kProfile4G{100.0, 40.0};

// Checks the invariants a run depends on: at least one vehicle, positive
// periods and duration, unique labels, requests naming known vehicles.
Status validate(const ScenarioConfig& config);

// Relative trace paths resolve against `base_dir`.
Expected<ScenarioConfig> scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json scenario_to_json(const ScenarioConfig& config);

// `source` is a preset name ("field-test", "load") or a JSON file path.
Expected<ScenarioConfig> load_scenario(const std::string& source);

// Two-vehicle lane-change run at desk scale.
ScenarioConfig field_test_scenario();
// `vehicles` cars at 1 Hz state and neighbor polling, in real time.
ScenarioConfig load_scenario_preset(std::size_t vehicles = 20, double duration_s = 60.0);

Drowsiness drowsiness_at(const VehicleSpec& v, double t_s);

}  // namespace rucs::sim
