#include "rucs/sim/decision.hpp"

namespace rucs::sim {

std::string_view to_string(LaneChangeDecision d) {
  switch (d) {
    case LaneChangeDecision::change_ahead: return "change_ahead";
    case LaneChangeDecision::decelerate_and_change_behind: return "decelerate_and_change_behind";
  }
  return "decelerate_and_change_behind";
}

LaneChangeDecision lane_change_decision(const Expected<PropertyResult>& drowsiness) {
  if (!drowsiness) return LaneChangeDecision::decelerate_and_change_behind;
  const auto& value = drowsiness->value;
  const auto binary = value.find("binary");
  if (binary != value.end() && binary->is_string() && binary->get<std::string>() == "non-drowsy") {
    return LaneChangeDecision::change_ahead;
  }
  return LaneChangeDecision::decelerate_and_change_behind;
}

}  // namespace rucs::sim
