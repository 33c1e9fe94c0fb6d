#pragma once

#include <optional>
#include <string_view>

#include "rucs/property_engine.hpp"

namespace rucs::sim {

enum class LaneChangeDecision { change_ahead, decelerate_and_change_behind };

std::string_view to_string(LaneChangeDecision d);

// Decision of the autonomous vehicle about merging next to a neighbor:
// change ahead only when the neighbor's driver reads non-drowsy. Anything
// else (drowsy, no data, unreadable result) takes the cautious branch.
LaneChangeDecision lane_change_decision(const Expected<PropertyResult>& drowsiness);

// Distance covered at `speed_mps` during `delay_s`. Both must be >= 0.
constexpr double distance_during_delay(double speed_mps, double delay_s) { return speed_mps * delay_s; }

}  // namespace rucs::sim
