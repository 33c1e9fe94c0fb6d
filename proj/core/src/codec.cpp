#include "rucs/codec.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace rucs {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "unknown";
}

constexpr std::array kTripStatus{std::pair{TripStatus::active, std::string_view{"active"}},
                                 std::pair{TripStatus::completed, std::string_view{"completed"}}};
constexpr std::array kAutomation{
    std::pair{AutomationLevel::manual, std::string_view{"manual"}},
    std::pair{AutomationLevel::assisted, std::string_view{"assisted"}},
    std::pair{AutomationLevel::autonomous, std::string_view{"autonomous"}}};
constexpr std::array kLaneIntent{std::pair{LaneChangeIntent::none, std::string_view{"none"}},
                                 std::pair{LaneChangeIntent::left, std::string_view{"left"}},
                                 std::pair{LaneChangeIntent::right, std::string_view{"right"}}};
constexpr std::array kDrowsiness{std::pair{Drowsiness::none, std::string_view{"none"}},
                                 std::pair{Drowsiness::low, std::string_view{"low"}},
                                 std::pair{Drowsiness::medium, std::string_view{"medium"}},
                                 std::pair{Drowsiness::high, std::string_view{"high"}}};
constexpr std::array kEnvelopeKind{
    std::pair{EnvelopeKind::action_request, std::string_view{"action_request"}},
    std::pair{EnvelopeKind::action_response, std::string_view{"action_response"}}};
constexpr std::array kStateKind{std::pair{StateKind::location, std::string_view{"location"}},
                                std::pair{StateKind::control, std::string_view{"control"}},
                                std::pair{StateKind::engine, std::string_view{"engine"}},
                                std::pair{StateKind::driver, std::string_view{"driver"}}};

template <typename E>
E enum_from(const json& j, std::optional<E> (*parse)(std::string_view), const char* what) {
  const auto s = j.get<std::string>();
  auto v = parse(s);
  if (!v) throw std::invalid_argument(std::string("invalid ") + what + ": '" + s + "'");
  return *v;
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    out.reset();
  } else {
    out = it->template get<T>();
  }
}

double finite_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
  return v.get<double>();
}

}  // namespace

std::string_view to_string(TripStatus v) { return name_of(kTripStatus, v); }
std::string_view to_string(AutomationLevel v) { return name_of(kAutomation, v); }
std::string_view to_string(LaneChangeIntent v) { return name_of(kLaneIntent, v); }
std::string_view to_string(Drowsiness v) { return name_of(kDrowsiness, v); }
std::string_view to_string(EnvelopeKind v) { return name_of(kEnvelopeKind, v); }
std::string_view to_string(StateKind v) { return name_of(kStateKind, v); }

std::optional<TripStatus> parse_trip_status(std::string_view s) { return lookup(kTripStatus, s); }
std::optional<AutomationLevel> parse_automation_level(std::string_view s) {
  return lookup(kAutomation, s);
}
std::optional<LaneChangeIntent> parse_lane_change_intent(std::string_view s) {
  return lookup(kLaneIntent, s);
}
std::optional<Drowsiness> parse_drowsiness(std::string_view s) { return lookup(kDrowsiness, s); }
std::optional<EnvelopeKind> parse_envelope_kind(std::string_view s) {
  return lookup(kEnvelopeKind, s);
}
std::optional<StateKind> parse_state_kind(std::string_view s) { return lookup(kStateKind, s); }

void to_json(json& j, const Timestamp& v) { j = format_rfc3339(v); }
void from_json(const json& j, Timestamp& v) {
  const auto s = j.get<std::string>();
  auto t = parse_rfc3339(s);
  if (!t) throw std::invalid_argument("invalid timestamp: '" + s + "'");
  v = *t;
}

void to_json(json& j, TripStatus v) { j = to_string(v); }
void from_json(const json& j, TripStatus& v) { v = enum_from(j, parse_trip_status, "trip status"); }
void to_json(json& j, AutomationLevel v) { j = to_string(v); }
void from_json(const json& j, AutomationLevel& v) {
  v = enum_from(j, parse_automation_level, "automation level");
}
void to_json(json& j, LaneChangeIntent v) { j = to_string(v); }
void from_json(const json& j, LaneChangeIntent& v) {
  v = enum_from(j, parse_lane_change_intent, "lane change intent");
}
void to_json(json& j, Drowsiness v) { j = to_string(v); }
void from_json(const json& j, Drowsiness& v) { v = enum_from(j, parse_drowsiness, "drowsiness"); }
void to_json(json& j, EnvelopeKind v) { j = to_string(v); }
void from_json(const json& j, EnvelopeKind& v) {
  v = enum_from(j, parse_envelope_kind, "envelope kind");
}

void to_json(json& j, const UserAccount& v) {
  j = json{{"user_id", v.user_id}, {"credential", v.credential}, {"display_name", v.display_name}};
}
void from_json(const json& j, UserAccount& v) {
  j.at("user_id").get_to(v.user_id);
  j.at("credential").get_to(v.credential);
  j.at("display_name").get_to(v.display_name);
}

void to_json(json& j, const VehicleProfile& v) {
  j = json{{"vehicle_id", v.vehicle_id},
           {"owner", v.owner},
           {"model", v.model},
           {"year", v.year},
           {"plate_number", v.plate_number},
           {"color", v.color},
           {"exposed_properties", v.exposed_properties},
           {"exposed_actions", v.exposed_actions}};
}
void from_json(const json& j, VehicleProfile& v) {
  j.at("vehicle_id").get_to(v.vehicle_id);
  j.at("owner").get_to(v.owner);
  j.at("model").get_to(v.model);
  j.at("year").get_to(v.year);
  j.at("plate_number").get_to(v.plate_number);
  j.at("color").get_to(v.color);
  j.at("exposed_properties").get_to(v.exposed_properties);
  j.at("exposed_actions").get_to(v.exposed_actions);
}

void to_json(json& j, const Trip& v) {
  j = json{{"trip_id", v.trip_id},           {"vehicle", v.vehicle},
           {"status", v.status},             {"listen_topic", v.listen_topic},
           {"send_topic", v.send_topic},     {"started_at", v.started_at}};
  put_optional(j, "completed_at", v.completed_at);
}
void from_json(const json& j, Trip& v) {
  j.at("trip_id").get_to(v.trip_id);
  j.at("vehicle").get_to(v.vehicle);
  j.at("status").get_to(v.status);
  j.at("listen_topic").get_to(v.listen_topic);
  j.at("send_topic").get_to(v.send_topic);
  j.at("started_at").get_to(v.started_at);
  get_optional(j, "completed_at", v.completed_at);
}

void to_json(json& j, const LocationState& v) {
  j = json{{"latitude", v.latitude},
           {"longitude", v.longitude},
           {"speed", v.speed},
           {"heading", v.heading}};
}
void from_json(const json& j, LocationState& v) {
  v.latitude = finite_number(j, "latitude");
  v.longitude = finite_number(j, "longitude");
  v.speed = finite_number(j, "speed");
  v.heading = finite_number(j, "heading");
}

void to_json(json& j, const ControlState& v) {
  j = json{{"automation_level", v.automation_level}};
  put_optional(j, "lane_change_intent", v.lane_change_intent);
}
void from_json(const json& j, ControlState& v) {
  j.at("automation_level").get_to(v.automation_level);
  get_optional(j, "lane_change_intent", v.lane_change_intent);
}

void to_json(json& j, const EngineState& v) {
  j = json{{"running", v.running}};
  put_optional(j, "rpm", v.rpm);
}
void from_json(const json& j, EngineState& v) {
  j.at("running").get_to(v.running);
  get_optional(j, "rpm", v.rpm);
}

void to_json(json& j, const DriverState& v) {
  j = json{{"drowsiness", v.drowsiness}, {"measured_at", v.measured_at}};
}
void from_json(const json& j, DriverState& v) {
  j.at("drowsiness").get_to(v.drowsiness);
  j.at("measured_at").get_to(v.measured_at);
}

void to_json(json& j, const StateRecord& v) {
  j = json{{"trip", v.trip}, {"seq", v.seq}, {"recorded_at", v.recorded_at}};
  put_optional(j, "client_time", v.client_time);
  put_optional(j, "location", v.location);
  put_optional(j, "control", v.control);
  put_optional(j, "engine", v.engine);
  put_optional(j, "driver", v.driver);
}
void from_json(const json& j, StateRecord& v) {
  j.at("trip").get_to(v.trip);
  j.at("seq").get_to(v.seq);
  j.at("recorded_at").get_to(v.recorded_at);
  get_optional(j, "client_time", v.client_time);
  get_optional(j, "location", v.location);
  get_optional(j, "control", v.control);
  get_optional(j, "engine", v.engine);
  get_optional(j, "driver", v.driver);
}

void to_json(json& j, const VehicleDescription& v) {
  j = json{{"model", v.model}, {"year", v.year}, {"color", v.color}};
}
void from_json(const json& j, VehicleDescription& v) {
  j.at("model").get_to(v.model);
  j.at("year").get_to(v.year);
  j.at("color").get_to(v.color);
}

void to_json(json& j, const NeighborInfo& v) {
  j = json{{"trip", v.trip},
           {"vehicle_description", v.vehicle_description},
           {"location", v.location},
           {"distance", v.distance},
           {"requestable_properties", v.requestable_properties},
           {"requestable_actions", v.requestable_actions}};
}
void from_json(const json& j, NeighborInfo& v) {
  j.at("trip").get_to(v.trip);
  j.at("vehicle_description").get_to(v.vehicle_description);
  j.at("location").get_to(v.location);
  v.distance = finite_number(j, "distance");
  j.at("requestable_properties").get_to(v.requestable_properties);
  j.at("requestable_actions").get_to(v.requestable_actions);
}

void to_json(json& j, const Envelope& v) {
  j = json{{"topic", v.topic},
           {"correlation_id", v.correlation_id},
           {"kind", v.kind},
           {"action", v.action},
           {"payload", v.payload},
           {"published_at", v.published_at}};
  put_optional(j, "reply_to", v.reply_to);
}
void from_json(const json& j, Envelope& v) {
  j.at("topic").get_to(v.topic);
  j.at("correlation_id").get_to(v.correlation_id);
  j.at("kind").get_to(v.kind);
  j.at("action").get_to(v.action);
  v.payload = j.contains("payload") ? j.at("payload") : json(nullptr);
  j.at("published_at").get_to(v.published_at);
  get_optional(j, "reply_to", v.reply_to);
}

}  // namespace rucs
