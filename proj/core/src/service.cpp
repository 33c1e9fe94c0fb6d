#include "rucs/service.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <vector>

#include "rucs/codec.hpp"

namespace rucs {

namespace {

using nlohmann::json;

constexpr auto kDeferredWait = std::chrono::seconds(10);

Expected<json> parse_body(const std::string& body) {
  if (body.empty()) return make_error(ErrorCode::bad_request, "request body must be a JSON object");
  try {
    auto j = json::parse(body);
    if (!j.is_object()) return make_error(ErrorCode::bad_request, "request body must be a JSON object");
    return j;
  } catch (const json::exception&) {
    return make_error(ErrorCode::bad_request, "malformed JSON");
  }
}

Expected<std::string> required_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    return make_error(ErrorCode::bad_request, std::string("'") + key + "' must be a non-empty string");
  }
  return it->get<std::string>();
}

Expected<std::set<std::string>> string_set(const json& j, const char* key) {
  std::set<std::string> out;
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) return make_error(ErrorCode::bad_request, std::string("'") + key + "' must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) return make_error(ErrorCode::bad_request, std::string("'") + key + "' must hold strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

std::optional<double> query_number(const std::map<std::string, std::string>& query, const std::string& key,
                                   bool& malformed) {
  const auto it = query.find(key);
  if (it == query.end()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) malformed = true;
    return v;
  } catch (const std::exception&) {
    malformed = true;
    return std::nullopt;
  }
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    const auto slash = path.find('/');
    const auto part = path.substr(0, slash);
    if (!part.empty()) parts.push_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

ApiResponse respond(Expected<json> result) {
  if (result) return ApiResponse{200, std::move(*result), 0.0};
  return ApiResponse{http_status(result.error().code), error_body(result.error()), 0.0};
}

}  // namespace

std::string bearer_token(std::string_view authorization) {
  constexpr std::string_view prefix = "Bearer ";
  if (authorization.size() <= prefix.size() || authorization.substr(0, prefix.size()) != prefix) return {};
  return std::string(authorization.substr(prefix.size()));
}

json error_body(const Error& error) {
  return json{{"error", to_string(error.code)}, {"message", error.message}};
}

Service::Service(const Clock& clock, Options options)
    : clock_(clock),
      options_(std::move(options)),
      registry_(clock),
      state_log_(options_.config.data_dir),
      geo_(clock),
      cache_(clock),
      broker_(options_.config.subscriber_queue),
      engine_(options_.catalog, state_log_, clock, options_.handlers, options_.config.deferred_workers),
      router_(options_.catalog, registry_, cache_, broker_, clock,
              ActionRouter::Options{options_.config.topic_cache_ttl_s, options_.config.action_timeout_s, 4096}) {
  state_log_.set_append_listener([this](const StateRecord& record) {
    (void)geo_.upsert_position(record.trip, *record.location, record.recorded_at, record.seq);
  });
  if (options_.background_sweeper) sweeper_ = std::thread([this] { sweeper_loop(); });
}

Service::~Service() {
  {
    std::lock_guard lock(sweeper_mutex_);
    stopping_ = true;
  }
  sweeper_cv_.notify_all();
  if (sweeper_.joinable()) sweeper_.join();
}

void Service::sweeper_loop() {
  std::unique_lock lock(sweeper_mutex_);
  while (!stopping_) {
    sweeper_cv_.wait_for(lock, std::chrono::milliseconds(50));
    if (stopping_) break;
    lock.unlock();
    router_.expire_due();
    lock.lock();
  }
}

Expected<UserId> Service::authenticate(std::string_view authorization) const {
  const auto token = bearer_token(authorization);
  if (token.empty()) return make_error(ErrorCode::unauthorized, "missing bearer token");
  return registry_.authenticate(token);
}

Expected<Service::OwnedTrip> Service::owned_trip(std::string_view authorization, const TripId& trip_id) const {
  auto user = authenticate(authorization);
  if (!user) return user.error();
  auto trip = registry_.trip(trip_id);
  if (!trip) return make_error(ErrorCode::forbidden, "trip does not belong to the caller");
  auto vehicle = registry_.vehicle(trip->vehicle);
  if (!vehicle || vehicle->owner != *user) {
    return make_error(ErrorCode::forbidden, "trip does not belong to the caller");
  }
  return OwnedTrip{*user, std::move(*trip), std::move(*vehicle)};
}

Expected<Service::OwnedTrip> Service::owned_active_trip(std::string_view authorization, const TripId& trip_id) const {
  auto owned = owned_trip(authorization, trip_id);
  if (!owned) return owned;
  if (owned->trip.status != TripStatus::active) {
    return make_error(ErrorCode::trip_not_active, "trip " + trip_id.value + " is not active");
  }
  return owned;
}

Expected<VehicleProfile> Service::active_trip_vehicle(const TripId& trip_id) const {
  auto trip = registry_.trip(trip_id);
  if (!trip || trip->status != TripStatus::active) {
    return make_error(ErrorCode::trip_not_active, "target trip is not active");
  }
  return registry_.vehicle(trip->vehicle);
}

Expected<json> Service::register_user(const json& body) {
  auto credential = required_string(body, "credential");
  if (!credential) return credential.error();
  std::string display_name;
  if (const auto it = body.find("display_name"); it != body.end()) {
    if (!it->is_string()) return make_error(ErrorCode::bad_request, "'display_name' must be a string");
    display_name = it->get<std::string>();
  }
  const auto vit = body.find("vehicle");
  if (vit == body.end() || !vit->is_object()) return make_error(ErrorCode::bad_request, "'vehicle' must be an object");
  const json& v = *vit;

  VehicleFields fields;
  auto model = required_string(v, "model");
  if (!model) return model.error();
  auto plate = required_string(v, "plate_number");
  if (!plate) return plate.error();
  auto color = required_string(v, "color");
  if (!color) return color.error();
  const auto year = v.find("year");
  if (year == v.end() || !year->is_number_integer()) return make_error(ErrorCode::bad_request, "'year' must be an integer");
  auto props = string_set(v, "exposed_properties");
  if (!props) return props.error();
  auto actions = string_set(v, "exposed_actions");
  if (!actions) return actions.error();
  for (const auto& p : *props) {
    if (!options_.catalog.has_property(p)) {
      return make_error(ErrorCode::invalid_exposure, "'" + p + "' is not a catalog property");
    }
  }
  for (const auto& a : *actions) {
    if (!options_.catalog.has_action(a)) {
      return make_error(ErrorCode::invalid_exposure, "'" + a + "' is not a catalog action");
    }
  }
  fields.model = std::move(*model);
  fields.year = year->get<int>();
  fields.plate_number = std::move(*plate);
  fields.color = std::move(*color);
  fields.exposed_properties = std::move(*props);
  fields.exposed_actions = std::move(*actions);

  auto reg = registry_.register_user(std::move(display_name), std::move(*credential), std::move(fields));
  if (!reg) return reg.error();
  return json{{"token", reg->token}, {"vehicle_id", reg->vehicle.vehicle_id}};
}

Expected<json> Service::start_trip(std::string_view authorization, const json& body) {
  auto user = authenticate(authorization);
  if (!user) return user.error();
  auto vehicle_id = required_string(body, "vehicle_id");
  if (!vehicle_id) return vehicle_id.error();
  auto vehicle = registry_.vehicle(VehicleId{*vehicle_id});
  if (!vehicle || vehicle->owner != *user) {
    return make_error(ErrorCode::forbidden, "vehicle does not belong to the caller");
  }
  auto trip = registry_.start_trip(vehicle->vehicle_id);
  if (!trip) return trip.error();

  (void)broker_.declare_topic(trip->listen_topic);
  (void)broker_.declare_topic(trip->send_topic);
  state_log_.open_trip(trip->trip_id);
  geo_.activate(trip->trip_id,
                GeoIndex::TripProfile{describe(*vehicle), vehicle->exposed_properties, vehicle->exposed_actions});

  return json{{"trip_id", trip->trip_id},
              {"listen_topic", trip->listen_topic},
              {"send_topic", trip->send_topic},
              {"started_at", trip->started_at}};
}

Expected<json> Service::post_state(std::string_view authorization, const TripId& trip_id, const json& body) {
  auto owned = owned_trip(authorization, trip_id);
  if (!owned) return owned.error();

  StateRecord record;
  record.trip = trip_id;
  record.recorded_at = clock_.now();
  try {
    if (const auto it = body.find("location"); it != body.end() && !it->is_null()) {
      record.location = it->get<LocationState>();
    }
    if (const auto it = body.find("control"); it != body.end() && !it->is_null()) {
      record.control = it->get<ControlState>();
    }
    if (const auto it = body.find("engine"); it != body.end() && !it->is_null()) {
      record.engine = it->get<EngineState>();
    }
    if (const auto it = body.find("driver"); it != body.end() && !it->is_null()) {
      DriverState driver;
      it->at("drowsiness").get_to(driver.drowsiness);
      driver.measured_at = it->contains("measured_at") ? it->at("measured_at").get<Timestamp>() : record.recorded_at;
      record.driver = driver;
    }
    if (const auto it = body.find("client_time"); it != body.end() && !it->is_null()) {
      record.client_time = it->get<Timestamp>();
    }
  } catch (const std::exception& e) {
    return make_error(ErrorCode::bad_request, e.what());
  }

  std::int64_t seq = 0;
  if (const auto it = body.find("seq"); it != body.end() && !it->is_null()) {
    if (!it->is_number_integer()) return make_error(ErrorCode::bad_request, "'seq' must be an integer");
    record.seq = seq = it->get<std::int64_t>();
    if (auto s = state_log_.append_state(record); !s) return s.error();
  } else {
    auto assigned = state_log_.append_next(record);
    if (!assigned) return assigned.error();
    seq = *assigned;
  }
  return json{{"seq", seq}, {"recorded_at", record.recorded_at}};
}

Expected<json> Service::get_neighbors(std::string_view authorization, const TripId& trip_id,
                                      std::optional<double> radius_m, std::optional<double> max_age_s) {
  auto owned = owned_active_trip(authorization, trip_id);
  if (!owned) return owned.error();
  const double radius = radius_m.value_or(options_.config.default_radius_m);
  const double max_age = max_age_s.value_or(options_.config.default_max_age_s);
  if (!std::isfinite(radius) || radius <= 0 || !std::isfinite(max_age) || max_age <= 0) {
    return make_error(ErrorCode::bad_request, "radius and max_age must be positive numbers");
  }
  auto list = geo_.neighbors(trip_id, radius, max_age);
  if (!list) return list.error();
  return json{{"trip", trip_id}, {"radius_m", radius}, {"max_age_s", max_age}, {"neighbors", *list}};
}

Expected<json> Service::request_property(std::string_view authorization, const TripId& trip_id, const json& body) {
  auto owned = owned_active_trip(authorization, trip_id);
  if (!owned) return owned.error();
  auto target = required_string(body, "target_trip");
  if (!target) return target.error();
  auto property = required_string(body, "property");
  if (!property) return property.error();
  PropertyRequest request{trip_id, TripId{*target}, *property, json::object()};
  if (const auto it = body.find("params"); it != body.end() && !it->is_null()) request.params = *it;

  auto vehicle = active_trip_vehicle(request.target_trip);
  if (!vehicle) return vehicle.error();
  auto result = engine_.request(request, vehicle->exposed_properties, kDeferredWait);
  if (!result) return result.error();
  json out = *result;
  out["target_trip"] = request.target_trip;
  return out;
}

Expected<json> Service::request_action(std::string_view authorization, const TripId& trip_id, const json& body) {
  auto owned = owned_active_trip(authorization, trip_id);
  if (!owned) return owned.error();
  auto target = required_string(body, "target_trip");
  if (!target) return target.error();
  auto action = required_string(body, "action");
  if (!action) return action.error();
  ActionRequest request{trip_id, TripId{*target}, *action, json::object(), std::nullopt};
  if (const auto it = body.find("payload"); it != body.end() && !it->is_null()) request.payload = *it;
  if (const auto it = body.find("timeout_s"); it != body.end() && !it->is_null()) {
    if (!it->is_number()) return make_error(ErrorCode::invalid_timeout, "'timeout_s' must be a number");
    request.timeout_s = it->get<double>();
  }

  std::set<ActionName> exposed;
  if (auto trip = registry_.trip(request.target_trip)) {
    if (auto vehicle = registry_.vehicle(trip->vehicle)) exposed = vehicle->exposed_actions;
  }
  auto correlation = router_.dispatch_action(request, exposed);
  if (!correlation) return correlation.error();
  return json{{"status", "accepted"}, {"correlation_id", *correlation}};
}

Expected<json> Service::respond_action(std::string_view authorization, const TripId& trip_id, const json& body) {
  auto owned = owned_active_trip(authorization, trip_id);
  if (!owned) return owned.error();
  auto correlation = required_string(body, "correlation_id");
  if (!correlation) return correlation.error();
  Envelope response{owned->trip.send_topic,
                    *correlation,
                    EnvelopeKind::action_response,
                    body.value("action", std::string{}),
                    body.contains("payload") ? body.at("payload") : json::object(),
                    std::nullopt,
                    clock_.now()};
  (void)broker_.publish(response);
  if (auto s = router_.complete_action(response, trip_id); !s) return s.error();
  return json{{"status", "forwarded"}, {"correlation_id", *correlation}};
}

Expected<json> Service::complete_trip(std::string_view authorization, const TripId& trip_id) {
  auto owned = owned_trip(authorization, trip_id);
  if (!owned) return owned.error();
  auto trip = registry_.complete_trip(trip_id);
  if (!trip) return trip.error();
  state_log_.close_trip(trip_id);
  geo_.evict(trip_id);
  router_.forget_topic(trip_id);
  broker_.remove_topic(trip->listen_topic);
  broker_.remove_topic(trip->send_topic);
  return json{{"trip_id", trip_id}, {"status", trip->status}, {"completed_at", *trip->completed_at}};
}

Expected<Subscription> Service::open_listen_stream(std::string_view authorization, const TripId& trip_id) {
  auto owned = owned_active_trip(authorization, trip_id);
  if (!owned) return owned.error();
  return broker_.subscribe(owned->trip.listen_topic);
}

ApiResponse Service::handle(const ApiRequest& request) {
  const auto started = std::chrono::steady_clock::now();
  if (options_.config.processing_delay_ms > 0) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(options_.config.processing_delay_ms));
  }
  ApiResponse response;
  try {
    response = dispatch(request);
  } catch (const std::exception& e) {
    response = ApiResponse{500, error_body(make_error(ErrorCode::internal, "internal error")), 0.0};
  }
  response.processing_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return response;
}

ApiResponse Service::dispatch(const ApiRequest& request) {
  const auto parts = split_path(request.path);
  const auto not_found = [] { return respond(make_error(ErrorCode::not_found, "no such endpoint")); };

  if (parts.size() == 1 && parts[0] == "healthz" && request.method == "GET") {
    return ApiResponse{200, json{{"status", "ok"}}, 0.0};
  }
  if (parts.empty() || parts[0] != "api") return not_found();

  if (parts.size() == 2 && parts[1] == "register" && request.method == "POST") {
    auto body = parse_body(request.body);
    if (!body) return respond(body.error());
    return respond(register_user(*body));
  }

  if (parts.size() < 2 || parts[1] != "trips") return not_found();

  // Everything below requires a valid token, checked before the body is read.
  if (auto user = authenticate(request.authorization); !user) return respond(user.error());

  if (parts.size() == 2) {
    if (request.method != "POST") return not_found();
    auto body = parse_body(request.body);
    if (!body) return respond(body.error());
    return respond(start_trip(request.authorization, *body));
  }

  if (!is_valid_trip_id(parts[2])) return respond(make_error(ErrorCode::forbidden, "trip does not belong to the caller"));
  const TripId trip{std::string(parts[2])};
  const std::vector<std::string_view> rest(parts.begin() + 3, parts.end());
  const auto is = [&](std::initializer_list<std::string_view> want, std::string_view method) {
    return request.method == method && std::equal(rest.begin(), rest.end(), want.begin(), want.end());
  };
  const auto with_body = [&](auto&& fn) {
    auto body = parse_body(request.body);
    if (!body) return respond(body.error());
    return respond(fn(*body));
  };

  if (is({"state"}, "POST")) {
    return with_body([&](const json& b) { return post_state(request.authorization, trip, b); });
  }
  if (is({"neighbors"}, "GET")) {
    bool malformed = false;
    const auto radius = query_number(request.query, "radius", malformed);
    const auto max_age = query_number(request.query, "max_age", malformed);
    if (malformed) return respond(make_error(ErrorCode::bad_request, "radius and max_age must be numbers"));
    return respond(get_neighbors(request.authorization, trip, radius, max_age));
  }
  if (is({"requests", "property"}, "POST")) {
    return with_body([&](const json& b) { return request_property(request.authorization, trip, b); });
  }
  if (is({"requests", "action"}, "POST")) {
    return with_body([&](const json& b) { return request_action(request.authorization, trip, b); });
  }
  if (is({"responses", "action"}, "POST")) {
    return with_body([&](const json& b) { return respond_action(request.authorization, trip, b); });
  }
  if (is({"complete"}, "POST")) return respond(complete_trip(request.authorization, trip));
  if (is({"listen"}, "GET")) {
    // Non-streaming form: returns whatever is queued right now.
    auto sub = open_listen_stream(request.authorization, trip);
    if (!sub) return respond(sub.error());
    return respond(json{{"envelopes", sub->drain()}});
  }
  return not_found();
}

}  // namespace rucs
