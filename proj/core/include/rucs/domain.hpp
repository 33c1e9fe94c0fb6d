#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "rucs/clock.hpp"

namespace rucs {

template <typename Tag>
struct StrongId {
  std::string value;

  StrongId() = default;
  explicit StrongId(std::string v) : value(std::move(v)) {}

  [[nodiscard]] bool empty() const noexcept { return value.empty(); }
  friend auto operator<=>(const StrongId&, const StrongId&) = default;
};

using UserId = StrongId<struct UserIdTag>;
using VehicleId = StrongId<struct VehicleIdTag>;
using TripId = StrongId<struct TripIdTag>;

using PropertyName = std::string;
using ActionName = std::string;
using TopicName = std::string;

enum class TripStatus { active, completed };
enum class AutomationLevel { manual, assisted, autonomous };
enum class LaneChangeIntent { none, left, right };
enum class Drowsiness { none, low, medium, high };

struct UserAccount {
  UserId user_id;
  std::string credential;
  std::string display_name;

  friend bool operator==(const UserAccount&, const UserAccount&) = default;
};

struct VehicleProfile {
  VehicleId vehicle_id;
  UserId owner;
  std::string model;
  int year = 0;
  std::string plate_number;
  std::string color;
  std::set<PropertyName> exposed_properties;
  std::set<ActionName> exposed_actions;

  friend bool operator==(const VehicleProfile&, const VehicleProfile&) = default;
};

struct Trip {
  TripId trip_id;
  VehicleId vehicle;
  TripStatus status = TripStatus::active;
  TopicName listen_topic;
  TopicName send_topic;
  Timestamp started_at;
  std::optional<Timestamp> completed_at;

  friend bool operator==(const Trip&, const Trip&) = default;
};

// WGS84 degrees; speed in m/s; heading clockwise from north in [0, 360).
struct LocationState {
  double latitude = 0.0;
  double longitude = 0.0;
  double speed = 0.0;
  double heading = 0.0;

  friend bool operator==(const LocationState&, const LocationState&) = default;
};

struct ControlState {
  AutomationLevel automation_level = AutomationLevel::manual;
  std::optional<LaneChangeIntent> lane_change_intent;

  friend bool operator==(const ControlState&, const ControlState&) = default;
};

struct EngineState {
  bool running = true;
  std::optional<double> rpm;

  friend bool operator==(const EngineState&, const EngineState&) = default;
};

struct DriverState {
  Drowsiness drowsiness = Drowsiness::none;
  Timestamp measured_at;

  friend bool operator==(const DriverState&, const DriverState&) = default;
};

// location is optional at the type level only so that a record missing it
// can be represented and rejected by validation.
struct StateRecord {
  TripId trip;
  std::int64_t seq = 0;
  Timestamp recorded_at;
  std::optional<Timestamp> client_time;
  std::optional<LocationState> location;
  std::optional<ControlState> control;
  std::optional<EngineState> engine;
  std::optional<DriverState> driver;

  friend bool operator==(const StateRecord&, const StateRecord&) = default;
};

enum class StateKind { location, control, engine, driver };

struct VehicleDescription {
  std::string model;
  int year = 0;
  std::string color;

  friend bool operator==(const VehicleDescription&, const VehicleDescription&) = default;
};

// What other road users learn about a trip. Carries no owner identity and
// no plate number.
struct NeighborInfo {
  TripId trip;
  VehicleDescription vehicle_description;
  LocationState location;
  double distance = 0.0;
  std::set<PropertyName> requestable_properties;
  std::set<ActionName> requestable_actions;

  friend bool operator==(const NeighborInfo&, const NeighborInfo&) = default;
};

inline VehicleDescription describe(const VehicleProfile& v) {
  return VehicleDescription{v.model, v.year, v.color};
}

// Binary reading of the four drowsiness levels.
inline bool is_drowsy(Drowsiness level) {
  return level == Drowsiness::medium || level == Drowsiness::high;
}

// Topics follow `trip.<trip_id>.in` (service -> client) and
// `trip.<trip_id>.out` (client -> service).
TopicName listen_topic_for(const TripId& trip);
TopicName send_topic_for(const TripId& trip);
bool is_valid_topic(std::string_view name);
bool is_valid_trip_id(std::string_view id);

}  // namespace rucs

template <typename Tag>
struct std::hash<rucs::StrongId<Tag>> {
  std::size_t operator()(const rucs::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};
