#pragma once

// Canonical JSON encoding of the domain model: snake_case field names,
// RFC-3339 timestamps, lowercase enum strings, absent optionals omitted.
// Decoding throws nlohmann::json::exception or std::invalid_argument on
// malformed input; use decode<T>() for the non-throwing form.

#include <string_view>

#include <nlohmann/json.hpp>

#include "rucs/domain.hpp"
#include "rucs/envelope.hpp"
#include "rucs/result.hpp"

namespace rucs {

using nlohmann::json;

std::string_view to_string(TripStatus v);
std::string_view to_string(AutomationLevel v);
std::string_view to_string(LaneChangeIntent v);
std::string_view to_string(Drowsiness v);
std::string_view to_string(EnvelopeKind v);
std::string_view to_string(StateKind v);

std::optional<TripStatus> parse_trip_status(std::string_view s);
std::optional<AutomationLevel> parse_automation_level(std::string_view s);
std::optional<LaneChangeIntent> parse_lane_change_intent(std::string_view s);
std::optional<Drowsiness> parse_drowsiness(std::string_view s);
std::optional<EnvelopeKind> parse_envelope_kind(std::string_view s);
std::optional<StateKind> parse_state_kind(std::string_view s);

void to_json(json& j, const Timestamp& v);
void from_json(const json& j, Timestamp& v);

template <typename Tag>
void to_json(json& j, const StrongId<Tag>& v) {
  j = v.value;
}
template <typename Tag>
void from_json(const json& j, StrongId<Tag>& v) {
  v.value = j.get<std::string>();
}

void to_json(json& j, TripStatus v);
void from_json(const json& j, TripStatus& v);
void to_json(json& j, AutomationLevel v);
void from_json(const json& j, AutomationLevel& v);
void to_json(json& j, LaneChangeIntent v);
void from_json(const json& j, LaneChangeIntent& v);
void to_json(json& j, Drowsiness v);
void from_json(const json& j, Drowsiness& v);
void to_json(json& j, EnvelopeKind v);
void from_json(const json& j, EnvelopeKind& v);

void to_json(json& j, const UserAccount& v);
void from_json(const json& j, UserAccount& v);
void to_json(json& j, const VehicleProfile& v);
void from_json(const json& j, VehicleProfile& v);
void to_json(json& j, const Trip& v);
void from_json(const json& j, Trip& v);
void to_json(json& j, const LocationState& v);
void from_json(const json& j, LocationState& v);
void to_json(json& j, const ControlState& v);
void from_json(const json& j, ControlState& v);
void to_json(json& j, const EngineState& v);
void from_json(const json& j, EngineState& v);
void to_json(json& j, const DriverState& v);
void from_json(const json& j, DriverState& v);
void to_json(json& j, const StateRecord& v);
void from_json(const json& j, StateRecord& v);
void to_json(json& j, const VehicleDescription& v);
void from_json(const json& j, VehicleDescription& v);
void to_json(json& j, const NeighborInfo& v);
void from_json(const json& j, NeighborInfo& v);
void to_json(json& j, const Envelope& v);
void from_json(const json& j, Envelope& v);

template <typename T>
Expected<T> decode(const json& j) {
  try {
    return j.get<T>();
  } catch (const std::exception& e) {
    return make_error(ErrorCode::bad_request, e.what());
  }
}

}  // namespace rucs
