#include "rucs/sim/scenario.hpp"

#include <cmath>
#include <fstream>

#include "rucs/codec.hpp"

namespace rucs::sim {

namespace {

using nlohmann::json;

Error invalid(std::string message) { return make_error(ErrorCode::scenario_invalid, std::move(message)); }

Expected<Trace> trace_from_spec(const json& v, const std::filesystem::path& base_dir, double duration_s) {
  if (const auto it = v.find("trace_file"); it != v.end()) {
    std::filesystem::path p = it->get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return read_trace(p);
  }
  if (const auto it = v.find("trace_preset"); it != v.end()) {
    const auto name = it->get<std::string>();
    if (name == "field-test-left") return field_test_trace("left", duration_s);
    if (name == "field-test-right") return field_test_trace("right", duration_s);
    return invalid("unknown trace preset '" + name + "'");
  }
  if (const auto it = v.find("trace"); it != v.end()) {
    std::vector<TracePoint> points;
    for (const auto& row : *it) {
      if (!row.is_array() || row.size() != 5) return invalid("inline trace rows must hold 5 numbers");
      points.push_back(TracePoint{row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                                  row[3].get<double>(), row[4].get<double>()});
    }
    if (points.empty()) return invalid("inline trace is empty");
    return Trace{std::move(points)};
  }
  return invalid("vehicle needs one of trace_file, trace_preset or trace");
}

LatencyProfile latency_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "4g") return kProfile4G;
    if (j.get<std::string>() == "none") return {};
    throw std::invalid_argument("unknown latency profile '" + j.get<std::string>() + "'");
  }
  return LatencyProfile{j.value("fixed_ms", 0.0), j.value("jitter_ms", 0.0)};
}

Expected<ScenarioConfig> parse(const json& j, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  c.name = j.value("name", std::string("custom"));
  c.duration_s = j.at("duration_s").get<double>();
  c.time_scale = j.value("time_scale", 1.0);
  if (const auto it = j.find("intervals"); it != j.end()) {
    c.state_period_s = it->value("state_period_s", c.state_period_s);
    c.neighbor_period_s = it->value("neighbor_period_s", c.neighbor_period_s);
  }
  c.neighbor_radius_m = j.value("neighbor_radius_m", c.neighbor_radius_m);
  if (const auto it = j.find("latency"); it != j.end()) c.latency = latency_from_json(*it);
  c.analysis_speed_mps = j.value("analysis_speed_mps", c.analysis_speed_mps);

  for (const auto& v : j.value("vehicles", json::array())) {
    VehicleSpec spec;
    spec.label = v.at("label").get<std::string>();
    const auto role = v.value("role", std::string("manual"));
    if (role == "autonomous") {
      spec.role = Role::autonomous;
    } else if (role == "manual") {
      spec.role = Role::manual;
    } else {
      return invalid("vehicle '" + spec.label + "' has unknown role '" + role + "'");
    }
    auto trace = trace_from_spec(v, base_dir, c.duration_s);
    if (!trace) return trace.error();
    spec.trace = std::move(*trace);
    for (const auto& step : v.value("drowsiness", json::array())) {
      spec.drowsiness.push_back(DrowsinessStep{step.value("from_s", 0.0), step.at("level").get<Drowsiness>()});
    }
    spec.exposed_properties = v.value("exposed_properties", std::set<std::string>{});
    spec.exposed_actions = v.value("exposed_actions", std::set<std::string>{});
    if (const auto it = v.find("action_reply"); it != v.end() && !it->is_null()) {
      spec.action_reply = it->get<std::string>();
    }
    c.vehicles.push_back(std::move(spec));
  }

  for (const auto& r : j.value("requests", json::array())) {
    ScriptedRequest req;
    req.from = r.at("from").get<std::string>();
    req.to = r.at("to").get<std::string>();
    const auto kind = r.value("kind", std::string("property"));
    if (kind == "property") {
      req.kind = RequestKind::property;
    } else if (kind == "action") {
      req.kind = RequestKind::action;
    } else {
      return invalid("unknown request kind '" + kind + "'");
    }
    req.name = r.at("name").get<std::string>();
    const auto trigger = r.value("trigger", std::string("first_neighbor"));
    if (trigger == "first_neighbor") {
      req.trigger = Trigger::first_neighbor;
    } else if (trigger == "periodic") {
      req.trigger = Trigger::periodic;
    } else {
      return invalid("unknown trigger '" + trigger + "'");
    }
    req.every_s = r.value("every_s", 0.0);
    req.start_s = r.value("start_s", 0.0);
    req.decide_lane_change = r.value("decide_lane_change", false);
    req.payload = r.value("payload", json::object());
    req.timeout_s = r.value("timeout_s", 5.0);
    c.requests.push_back(std::move(req));
  }
  return c;
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::autonomous ? "autonomous" : "manual"; }

const VehicleSpec* ScenarioConfig::vehicle(std::string_view label) const {
  for (const auto& v : vehicles) {
    if (v.label == label) return &v;
  }
  return nullptr;
}

Status validate(const ScenarioConfig& c) {
  if (c.vehicles.empty()) return invalid("scenario needs at least one vehicle");
  const auto positive = [](double v) { return std::isfinite(v) && v > 0; };
  if (!positive(c.duration_s)) return invalid("duration_s must be > 0");
  if (!positive(c.time_scale)) return invalid("time_scale must be > 0");
  if (!positive(c.state_period_s) || !positive(c.neighbor_period_s)) return invalid("periods must be > 0");
  if (!positive(c.neighbor_radius_m)) return invalid("neighbor_radius_m must be > 0");
  if (c.latency.fixed_ms < 0 || c.latency.jitter_ms < 0) return invalid("latency must be >= 0");
  if (c.analysis_speed_mps < 0) return invalid("analysis_speed_mps must be >= 0");
  std::set<std::string> labels;
  for (const auto& v : c.vehicles) {
    if (v.label.empty() || !labels.insert(v.label).second) return invalid("vehicle labels must be unique and non-empty");
    if (v.trace.empty()) return invalid("vehicle '" + v.label + "' has an empty trace");
  }
  for (const auto& r : c.requests) {
    if (!labels.contains(r.from) || !labels.contains(r.to)) return invalid("request names an unknown vehicle");
    if (r.from == r.to) return invalid("request targets its own vehicle");
    if (r.trigger == Trigger::periodic && !positive(r.every_s)) return invalid("periodic requests need every_s > 0");
    if (r.start_s < 0) return invalid("start_s must be >= 0");
  }
  return ok();
}

Expected<ScenarioConfig> scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) return invalid("scenario must be a JSON object");
  Expected<ScenarioConfig> parsed = invalid("unparsed");
  try {
    parsed = parse(j, base_dir);
  } catch (const std::exception& e) {
    return invalid(e.what());
  }
  if (!parsed) return parsed;
  if (auto s = validate(*parsed); !s) return s.error();
  return parsed;
}

json scenario_to_json(const ScenarioConfig& c) {
  json vehicles = json::array();
  for (const auto& v : c.vehicles) {
    json trace = json::array();
    for (const auto& p : v.trace.points()) trace.push_back({p.t_s, p.lat, p.lon, p.speed_mps, p.heading_deg});
    json steps = json::array();
    for (const auto& s : v.drowsiness) steps.push_back({{"from_s", s.from_s}, {"level", s.level}});
    json out = {{"label", v.label},
                {"role", to_string(v.role)},
                {"trace", std::move(trace)},
                {"drowsiness", std::move(steps)},
                {"exposed_properties", v.exposed_properties},
                {"exposed_actions", v.exposed_actions}};
    if (v.action_reply) out["action_reply"] = *v.action_reply;
    vehicles.push_back(std::move(out));
  }
  json requests = json::array();
  for (const auto& r : c.requests) {
    requests.push_back({{"from", r.from},
                        {"to", r.to},
                        {"kind", r.kind == RequestKind::property ? "property" : "action"},
                        {"name", r.name},
                        {"trigger", r.trigger == Trigger::periodic ? "periodic" : "first_neighbor"},
                        {"every_s", r.every_s},
                        {"start_s", r.start_s},
                        {"decide_lane_change", r.decide_lane_change},
                        {"payload", r.payload},
                        {"timeout_s", r.timeout_s}});
  }
  return json{{"name", c.name},
              {"duration_s", c.duration_s},
              {"time_scale", c.time_scale},
              {"intervals", {{"state_period_s", c.state_period_s}, {"neighbor_period_s", c.neighbor_period_s}}},
              {"neighbor_radius_m", c.neighbor_radius_m},
              {"latency", {{"fixed_ms", c.latency.fixed_ms}, {"jitter_ms", c.latency.jitter_ms}}},
              {"analysis_speed_mps", c.analysis_speed_mps},
              {"vehicles", std::move(vehicles)},
              {"requests", std::move(requests)}};
}

ScenarioConfig field_test_scenario() {
  ScenarioConfig c;
  c.name = "field-test";
  c.duration_s = 40.0;
  c.time_scale = 4.0;
  c.state_period_s = 0.25;
  c.neighbor_period_s = 1.0;

  VehicleSpec a;
  a.label = "A";
  a.role = Role::autonomous;
  a.trace = field_test_trace("left", c.duration_s);
  a.drowsiness = {{0.0, Drowsiness::none}};
  a.exposed_properties = {"drowsiness", "automation_level"};

  VehicleSpec b;
  b.label = "B";
  b.role = Role::manual;
  b.trace = field_test_trace("right", c.duration_s);
  b.drowsiness = {{0.0, Drowsiness::low}};
  b.exposed_properties = {"drowsiness", "automation_level"};
  b.exposed_actions = {"yield_request"};
  b.action_reply = "accept";

  c.vehicles = {std::move(a), std::move(b)};

  ScriptedRequest ask;
  ask.from = "A";
  ask.to = "B";
  ask.name = "drowsiness";
  ask.trigger = Trigger::first_neighbor;
  ask.start_s = 3.0;
  ask.decide_lane_change = true;

  ScriptedRequest monitor;
  monitor.from = "A";
  monitor.to = "B";
  monitor.name = "drowsiness";
  monitor.trigger = Trigger::periodic;
  monitor.start_s = 5.0;
  monitor.every_s = 2.0;

  ScriptedRequest yield;
  yield.from = "A";
  yield.to = "B";
  yield.kind = RequestKind::action;
  yield.name = "yield_request";
  yield.trigger = Trigger::first_neighbor;
  yield.start_s = 4.0;
  yield.payload = {{"side", "left"}};

  c.requests = {std::move(ask), std::move(monitor), std::move(yield)};
  return c;
}

ScenarioConfig load_scenario_preset(std::size_t vehicles, double duration_s) {
  ScenarioConfig c;
  c.name = "load";
  c.duration_s = duration_s;
  c.time_scale = 1.0;
  c.state_period_s = 1.0;
  c.neighbor_period_s = 1.0;
  for (std::size_t i = 0; i < vehicles; ++i) {
    StraightTrace spec;
    spec.duration_s = duration_s;
    spec.sample_period_s = 0.5;
    // Four lanes, cars 15 m apart: everyone is someone's neighbor.
    spec.right_m = static_cast<double>(i % 4) * kLaneWidthMeters;
    spec.lead_m = static_cast<double>(i / 4) * 15.0;
    VehicleSpec v;
    v.label = "V" + std::to_string(i + 1);
    v.role = i % 2 == 0 ? Role::manual : Role::autonomous;
    v.trace = straight_trace(spec);
    v.drowsiness = {{0.0, static_cast<Drowsiness>(i % 4)}};
    v.exposed_properties = {"drowsiness"};
    c.vehicles.push_back(std::move(v));
  }
  return c;
}

Expected<ScenarioConfig> load_scenario(const std::string& source) {
  if (source == "field-test") return field_test_scenario();
  if (source == "field-test-4g") {
    auto c = field_test_scenario();
    c.name = "field-test-4g";
    c.latency = kProfile4G;
    c.duration_s = 20.0;
    c.time_scale = 1.0;
    for (auto& v : c.vehicles) v.trace = field_test_trace(v.label == "A" ? "left" : "right", c.duration_s);
    return c;
  }
  if (source == "load") return load_scenario_preset();

  std::ifstream in(source);
  if (!in) return invalid("no preset or readable scenario file named '" + source + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    return invalid(std::string("scenario file is not valid JSON: ") + e.what());
  }
  return scenario_from_json(j, std::filesystem::path(source).parent_path());
}

Drowsiness drowsiness_at(const VehicleSpec& v, double t_s) {
  Drowsiness level = Drowsiness::none;
  double best = -1.0;
  for (const auto& step : v.drowsiness) {
    if (step.from_s <= t_s && step.from_s >= best) {
      best = step.from_s;
      level = step.level;
    }
  }
  return level;
}

}  // namespace rucs::sim
