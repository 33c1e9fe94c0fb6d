#include "rucs/sim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "rucs/codec.hpp"
#include "rucs/property_engine.hpp"
#include "rucs/sim/client.hpp"

namespace rucs::sim {

namespace {

using nlohmann::json;
using Steady = std::chrono::steady_clock;

constexpr double kManeuverRampS = 3.0;
constexpr double kDecelerationDeltaMps = 2.0;
constexpr double kDecelerationS = 8.0;

// splitmix64; spreads consecutive seeds into unrelated streams.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string random_hex(std::size_t bytes) {
  static thread_local std::random_device device;
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bytes; ++i) {
    const auto b = device() & 0xff;
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

std::string fixed(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

enum class EventKind { state = 0, neighbors = 1, request = 2 };

struct Event {
  double t_s = 0.0;
  EventKind kind = EventKind::state;
  std::size_t request = 0;  // index into config.requests
};

struct Maneuver {
  LaneChangeDecision kind = LaneChangeDecision::change_ahead;
  double start_s = 0.0;

  [[nodiscard]] double end_s() const {
    return start_s + kManeuverRampS + (kind == LaneChangeDecision::change_ahead ? 0.0 : kDecelerationS);
  }
};

struct LatencyRow {
  std::string vehicle;
  std::string kind;
  Reply reply;
};

struct RequestRow {
  std::string vehicle;
  std::size_t index = 0;
  double t_s = 0.0;
  std::string kind;
  std::string name;
  std::string target;
};

struct TraceRow {
  std::string vehicle;
  TracePoint point;
};

// Single sink for everything the vehicles log.
class Collector {
 public:
  void latency(const std::string& vehicle, const std::string& kind, const Reply& reply) {
    std::lock_guard lock(mutex_);
    latency_.push_back({vehicle, kind, reply});
    if (!reply.ok()) {
      ++errors_;
      errors_log_.push_back(format_rfc3339(reply.received_at) + " " + vehicle + " " + kind + " status " +
                            std::to_string(reply.status) + " " + reply.body.dump());
    }
  }
  void failure(const std::string& vehicle, const std::string& kind, const Error& error) {
    std::lock_guard lock(mutex_);
    ++errors_;
    errors_log_.push_back(vehicle + " " + kind + " " + std::string(to_string(error.code)) + " " + error.message);
  }
  void request(RequestRow row) {
    std::lock_guard lock(mutex_);
    requests_.push_back(std::move(row));
  }
  void trace(const std::string& vehicle, const TracePoint& p) {
    std::lock_guard lock(mutex_);
    traces_.push_back({vehicle, p});
  }
  void decision(DecisionRecord record) {
    std::lock_guard lock(mutex_);
    decision_lines_.push_back(json{{"event", "lane_change_decision"},
                                   {"vehicle", record.vehicle},
                                   {"target", record.target},
                                   {"t_s", record.t_s},
                                   {"result", record.result},
                                   {"decision", to_string(record.decision)}});
    decisions_.push_back(std::move(record));
  }
  void action_reply(const std::string& vehicle, const Envelope& envelope, double t_s) {
    std::lock_guard lock(mutex_);
    decision_lines_.push_back(json{{"event", "action_reply"},
                                   {"vehicle", vehicle},
                                   {"t_s", t_s},
                                   {"action", envelope.action},
                                   {"payload", envelope.payload}});
    replies_[envelope.action.empty() ? std::string("unknown") : envelope.action].push_back(envelope.payload);
  }
  void maneuver(const std::string& vehicle, const Maneuver& m) {
    std::lock_guard lock(mutex_);
    maneuvers_[vehicle] = m;
  }
  void note(std::string line) {
    std::lock_guard lock(mutex_);
    errors_log_.push_back(std::move(line));
  }

  // Everything below runs after the vehicles have been joined.
  Status write(const std::filesystem::path& dir, const ScenarioConfig& config, RunSummary& summary) const;

 private:
  std::string phase_of(const std::string& vehicle, double t_s) const;

  mutable std::mutex mutex_;
  std::vector<LatencyRow> latency_;
  std::vector<RequestRow> requests_;
  std::vector<TraceRow> traces_;
  std::vector<DecisionRecord> decisions_;
  std::vector<json> decision_lines_;
  std::map<std::string, std::vector<json>> replies_;
  std::map<std::string, Maneuver> maneuvers_;
  std::vector<std::string> errors_log_;
  std::size_t errors_ = 0;
};

std::string Collector::phase_of(const std::string& vehicle, double t_s) const {
  const Maneuver* m = nullptr;
  if (const auto it = maneuvers_.find(vehicle); it != maneuvers_.end()) {
    m = &it->second;
  } else {
    // Vehicles that never maneuver share the earliest window of the run.
    for (const auto& [_, other] : maneuvers_) {
      if (!m || other.start_s < m->start_s) m = &other;
    }
  }
  if (!m) return "before";
  if (t_s < m->start_s) return "before";
  if (t_s <= m->end_s()) return "during";
  return "after";
}

Status Collector::write(const std::filesystem::path& dir, const ScenarioConfig& config, RunSummary& summary) const {
  std::lock_guard lock(mutex_);
  const auto open = [&](const char* name) { return std::ofstream(dir / name); };

  auto latency = open(kLatencyFile);
  latency << "vehicle,kind,sent_at,received_at,rtt_s,server_processing_s,status\n";
  for (const auto& row : latency_) {
    latency << row.vehicle << ',' << row.kind << ',' << format_rfc3339(row.reply.sent_at) << ','
            << format_rfc3339(row.reply.received_at) << ',' << fixed(row.reply.rtt_s) << ','
            << fixed(row.reply.server_processing_s) << ',' << row.reply.status << '\n';
  }

  auto requests = open(kRequestsFile);
  auto sorted = requests_;
  std::sort(sorted.begin(), sorted.end(), [](const RequestRow& a, const RequestRow& b) {
    return std::tie(a.vehicle, a.index) < std::tie(b.vehicle, b.index);
  });
  requests << "vehicle,index,t_s,kind,name,target\n";
  for (const auto& r : sorted) {
    requests << r.vehicle << ',' << r.index << ',' << fixed(r.t_s, 3) << ',' << r.kind << ',' << r.name << ','
             << r.target << '\n';
  }

  auto traces = open(kTracesFile);
  auto points = traces_;
  std::stable_sort(points.begin(), points.end(), [](const TraceRow& a, const TraceRow& b) {
    return std::tie(a.vehicle, a.point.t_s) < std::tie(b.vehicle, b.point.t_s);
  });
  traces << "vehicle,t_s,lat,lon,speed_mps,heading_deg,phase\n";
  for (const auto& row : points) {
    const auto& p = row.point;
    traces << row.vehicle << ',' << fixed(p.t_s, 3) << ',' << fixed(p.lat, 8) << ',' << fixed(p.lon, 8) << ','
           << fixed(p.speed_mps, 4) << ',' << fixed(p.heading_deg, 3) << ',' << phase_of(row.vehicle, p.t_s) << '\n';
  }

  auto decisions = open(kDecisionsFile);
  for (const auto& line : decision_lines_) decisions << line.dump() << '\n';

  auto errors = open(kErrorsFile);
  for (const auto& line : errors_log_) errors << line << '\n';

  json counts = {{"neighbors", 0}, {"state", 0}, {"property", json::object()}, {"action", json::object()}};
  for (const auto& r : requests_) {
    if (r.kind == "property" || r.kind == "action") {
      auto& bucket = counts[r.kind];
      bucket[r.name] = bucket.value(r.name, 0) + 1;
    } else {
      counts[r.kind] = counts[r.kind].get<std::size_t>() + 1;
    }
  }
  counts["errors"] = errors_;
  counts["vehicles"] = config.vehicles.size();
  auto counts_out = open(kCountsFile);
  counts_out << counts.dump(2) << '\n';

  summary.requests = requests_.size();
  summary.errors = errors_;
  summary.counts = counts;
  summary.decisions = decisions_;
  summary.action_replies = replies_;

  if (!latency || !requests || !traces || !decisions || !errors || !counts_out) {
    return make_error(ErrorCode::io_error, "cannot write run logs into " + dir.string());
  }
  return ok();
}

struct Vehicle {
  const VehicleSpec* spec = nullptr;
  std::size_t index = 0;
  std::string token;
  std::string trip_id;
  std::unique_ptr<ServiceClient> client;
  // Used only from the listen thread to answer incoming actions.
  std::unique_ptr<ServiceClient> responder;
  std::unique_ptr<ListenStream> stream;
  std::optional<Maneuver> maneuver;
  std::vector<bool> fired;  // first_neighbor requests already sent
  std::size_t next_index = 0;
  std::size_t actions_sent = 0;
};

class Run {
 public:
  Run(const ScenarioConfig& config, const RunOptions& options) : config_(config), options_(options) {}

  Expected<RunSummary> execute();

 private:
  Status setup(Vehicle& v);
  void drive(Vehicle& v);
  void post_state(Vehicle& v, double t_s);
  std::vector<std::string> poll_neighbors(Vehicle& v, double t_s);
  void send_request(Vehicle& v, const ScriptedRequest& r, double t_s);
  void on_envelope(Vehicle& v, const Envelope& e);
  TracePoint position(const Vehicle& v, double t_s) const;
  std::vector<Event> schedule(const Vehicle& v) const;
  [[nodiscard]] double scenario_now() const {
    return std::chrono::duration<double>(Steady::now() - start_).count() * config_.time_scale;
  }
  std::string trip_of(const std::string& label) const {
    for (const auto& v : vehicles_) {
      if (v.spec->label == label) return v.trip_id;
    }
    return {};
  }

  const ScenarioConfig& config_;
  const RunOptions& options_;
  std::vector<Vehicle> vehicles_;
  Collector collector_;
  Steady::time_point start_;
};

TracePoint Run::position(const Vehicle& v, double t_s) const {
  TracePoint p = v.spec->trace.at(t_s);
  p.t_s = t_s;
  if (!v.maneuver || t_s < v.maneuver->start_s) return p;
  const double dt = t_s - v.maneuver->start_s;
  double forward = 0.0;
  double ramp_from = 0.0;
  if (v.maneuver->kind == LaneChangeDecision::decelerate_and_change_behind) {
    forward = -kDecelerationDeltaMps * std::min(dt, kDecelerationS);
    if (dt < kDecelerationS) p.speed_mps = std::max(0.0, p.speed_mps - kDecelerationDeltaMps);
    ramp_from = kDecelerationS;
  }
  const double right = kLaneWidthMeters * std::clamp((dt - ramp_from) / kManeuverRampS, 0.0, 1.0);
  TracePoint moved = offset(p, forward, right);
  moved.t_s = t_s;
  return moved;
}

std::vector<Event> Run::schedule(const Vehicle& v) const {
  std::vector<Event> events;
  const auto steps = [&](double start, double period) {
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
      const double t = start + static_cast<double>(k) * period;
      if (t > config_.duration_s + 1e-9) break;
      out.push_back(t);
    }
    return out;
  };
  // The t=0 state was posted during setup.
  for (double t : steps(config_.state_period_s, config_.state_period_s)) events.push_back({t, EventKind::state, 0});
  for (double t : steps(config_.neighbor_period_s, config_.neighbor_period_s)) {
    events.push_back({t, EventKind::neighbors, 0});
  }
  for (std::size_t i = 0; i < config_.requests.size(); ++i) {
    const auto& r = config_.requests[i];
    if (r.from != v.spec->label || r.trigger != Trigger::periodic) continue;
    for (double t : steps(r.start_s, r.every_s)) events.push_back({t, EventKind::request, i});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.t_s != b.t_s) return a.t_s < b.t_s;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return events;
}

void Run::post_state(Vehicle& v, double t_s) {
  const TracePoint p = position(v, t_s);
  json body = {{"location", LocationState{p.lat, p.lon, p.speed_mps, p.heading_deg}},
               {"control", ControlState{v.spec->role == Role::autonomous ? AutomationLevel::autonomous
                                                                         : AutomationLevel::manual,
                                        std::nullopt}},
               {"engine", EngineState{true, std::nullopt}},
               {"client_time", SystemClock{}.now()}};
  if (!v.spec->drowsiness.empty()) body["driver"] = {{"drowsiness", drowsiness_at(*v.spec, t_s)}};
  collector_.request({v.spec->label, v.next_index++, t_s, "state", "state", ""});
  auto reply = v.client->post("/api/trips/" + v.trip_id + "/state", body);
  if (!reply) {
    collector_.failure(v.spec->label, "state", reply.error());
    return;
  }
  collector_.latency(v.spec->label, "state", *reply);
  if (reply->ok()) collector_.trace(v.spec->label, p);
}

std::vector<std::string> Run::poll_neighbors(Vehicle& v, double t_s) {
  collector_.request({v.spec->label, v.next_index++, t_s, "neighbors", "neighbors", ""});
  auto reply = v.client->get("/api/trips/" + v.trip_id + "/neighbors?radius=" + fixed(config_.neighbor_radius_m, 1));
  if (!reply) {
    collector_.failure(v.spec->label, "neighbors", reply.error());
    return {};
  }
  collector_.latency(v.spec->label, "neighbors", *reply);
  std::vector<std::string> trips;
  if (reply->ok()) {
    for (const auto& n : reply->body.value("neighbors", json::array())) trips.push_back(n.value("trip", ""));
  }
  return trips;
}

void Run::send_request(Vehicle& v, const ScriptedRequest& r, double t_s) {
  const auto target = trip_of(r.to);
  const bool property = r.kind == RequestKind::property;
  const std::string kind = property ? "property" : "action";
  collector_.request({v.spec->label, v.next_index++, t_s, kind, r.name, r.to});
  Expected<Reply> reply = make_error(ErrorCode::internal);
  if (property) {
    reply = v.client->post("/api/trips/" + v.trip_id + "/requests/property",
                           json{{"target_trip", target}, {"property", r.name}});
  } else {
    ++v.actions_sent;
    reply = v.client->post("/api/trips/" + v.trip_id + "/requests/action",
                           json{{"target_trip", target}, {"action", r.name}, {"payload", r.payload},
                                {"timeout_s", r.timeout_s}});
  }
  if (!reply) {
    collector_.failure(v.spec->label, kind, reply.error());
  } else {
    collector_.latency(v.spec->label, kind, *reply);
  }
  if (!property || !r.decide_lane_change || v.maneuver) return;

  Expected<PropertyResult> result = make_error(ErrorCode::no_data, "no reply");
  if (reply && reply->ok()) {
    try {
      result = reply->body.get<PropertyResult>();
    } catch (const std::exception& e) {
      result = make_error(ErrorCode::internal, e.what());
    }
  } else if (reply) {
    result = make_error(ErrorCode::no_data, reply->body.value("error", std::string("error")));
  }
  const auto decision = lane_change_decision(result);
  v.maneuver = Maneuver{decision, t_s};
  collector_.maneuver(v.spec->label, *v.maneuver);
  collector_.decision(DecisionRecord{v.spec->label, r.to, t_s, reply ? reply->body : json(nullptr), decision});
}

void Run::on_envelope(Vehicle& v, const Envelope& e) {
  if (e.kind == EnvelopeKind::action_response) {
    collector_.action_reply(v.spec->label, e, scenario_now());
    return;
  }
  if (!v.spec->action_reply) return;
  auto reply = v.responder->post("/api/trips/" + v.trip_id + "/responses/action",
                                 json{{"correlation_id", e.correlation_id},
                                      {"action", e.action},
                                      {"payload", {{"decision", *v.spec->action_reply}}}});
  if (!reply) {
    collector_.failure(v.spec->label, "action", reply.error());
  } else {
    collector_.latency(v.spec->label, "action", *reply);
  }
}

Status Run::setup(Vehicle& v) {
  const auto& spec = *v.spec;
  static constexpr const char* kModels[] = {"Sedan", "Hatchback", "Estate", "Van"};
  static constexpr const char* kColors[] = {"silver", "blue", "white", "red", "black"};
  std::mt19937_64 rng(mix(options_.seed ^ (v.index + 1)));
  const auto model = kModels[rng() % std::size(kModels)];
  const auto color = kColors[rng() % std::size(kColors)];

  v.client = std::make_unique<ServiceClient>(options_.url, config_.latency, mix(options_.seed + 2 * v.index));
  v.responder = std::make_unique<ServiceClient>(options_.url, config_.latency, mix(options_.seed + 2 * v.index + 1));

  const auto fail = [&](const std::string& what, const Expected<Reply>& r) -> Error {
    if (!r) return r.error();
    return make_error(ErrorCode::internal, spec.label + ": " + what + " failed with " + std::to_string(r->status) +
                                               " " + r->body.dump());
  };

  // Plates carry a per-run suffix so repeated runs against one service never collide.
  auto reg = v.client->post("/api/register",
                            json{{"credential", random_hex(16)},
                                 {"display_name", "sim " + spec.label},
                                 {"vehicle",
                                  {{"model", model},
                                   {"year", 2015 + static_cast<int>(rng() % 8)},
                                   {"plate_number", "SIM-" + spec.label + "-" + random_hex(4)},
                                   {"color", color},
                                   {"exposed_properties", spec.exposed_properties},
                                   {"exposed_actions", spec.exposed_actions}}}});
  if (!reg || !reg->ok()) return fail("register", reg);
  v.token = reg->body.at("token").get<std::string>();
  v.client->set_token(v.token);
  v.responder->set_token(v.token);

  auto trip = v.client->post("/api/trips", json{{"vehicle_id", reg->body.at("vehicle_id")}});
  if (!trip || !trip->ok()) return fail("start trip", trip);
  v.trip_id = trip->body.at("trip_id").get<std::string>();
  v.fired.assign(config_.requests.size(), false);
  return ok();
}

void Run::drive(Vehicle& v) {
  const auto events = schedule(v);
  for (const auto& ev : events) {
    const auto due = start_ + std::chrono::duration_cast<Steady::duration>(
                                  std::chrono::duration<double>(ev.t_s / config_.time_scale));
    std::this_thread::sleep_until(due);
    switch (ev.kind) {
      case EventKind::state:
        post_state(v, ev.t_s);
        break;
      case EventKind::neighbors: {
        const auto seen = poll_neighbors(v, ev.t_s);
        for (std::size_t i = 0; i < config_.requests.size(); ++i) {
          const auto& r = config_.requests[i];
          if (r.from != v.spec->label || r.trigger != Trigger::first_neighbor || v.fired[i] || ev.t_s < r.start_s) {
            continue;
          }
          if (std::find(seen.begin(), seen.end(), trip_of(r.to)) == seen.end()) continue;
          v.fired[i] = true;
          send_request(v, r, ev.t_s);
        }
        break;
      }
      case EventKind::request:
        send_request(v, config_.requests[ev.request], ev.t_s);
        break;
    }
  }
}

Expected<RunSummary> Run::execute() {
  if (auto s = validate(config_); !s) return s.error();
  if (auto s = wait_healthy(options_.url, std::max(1, options_.health_attempts)); !s) return s.error();

  std::error_code ec;
  std::filesystem::create_directories(options_.out, ec);
  if (ec) return make_error(ErrorCode::io_error, "cannot create " + options_.out.string() + ": " + ec.message());

  vehicles_.resize(config_.vehicles.size());
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    vehicles_[i].spec = &config_.vehicles[i];
    vehicles_[i].index = i;
    if (auto s = setup(vehicles_[i]); !s) return s.error();
  }

  // Streams only for vehicles that take part in action exchanges.
  std::set<std::string> listeners;
  for (const auto& r : config_.requests) {
    if (r.kind == RequestKind::action) listeners.insert({r.from, r.to});
  }
  for (auto& v : vehicles_) {
    if (!listeners.contains(v.spec->label)) continue;
    Vehicle* self = &v;
    v.stream = std::make_unique<ListenStream>(options_.url, v.token, v.trip_id,
                                              [this, self](const Envelope& e) { on_envelope(*self, e); });
    if (auto s = v.stream->wait_open(std::chrono::seconds(5)); !s) return s.error();
  }

  const auto wall_started = Steady::now();
  start_ = Steady::now();
  // Every vehicle reports its t=0 position before anyone polls neighbors.
  for (auto& v : vehicles_) post_state(v, 0.0);
  start_ = Steady::now();

  std::vector<std::thread> threads;
  threads.reserve(vehicles_.size());
  for (auto& v : vehicles_) threads.emplace_back([this, &v] { drive(v); });
  for (auto& t : threads) t.join();

  // Let in-flight action replies land before the trips close.
  const auto deadline = Steady::now() + std::chrono::seconds(2);
  for (const auto& v : vehicles_) {
    while (v.stream && v.stream->received() < v.actions_sent && Steady::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }

  for (auto& v : vehicles_) {
    auto done = v.client->post("/api/trips/" + v.trip_id + "/complete", json::object());
    if (!done || !done->ok()) collector_.note(v.spec->label + " complete trip failed");
  }
  for (auto& v : vehicles_) {
    if (v.stream) v.stream->stop();
  }

  RunSummary summary;
  summary.dir = options_.out;
  summary.wall_s = std::chrono::duration<double>(Steady::now() - wall_started).count();
  if (auto s = collector_.write(options_.out, config_, summary); !s) return s.error();

  json trips = json::object();
  for (const auto& v : vehicles_) trips[v.spec->label] = v.trip_id;
  json run = {{"scenario", scenario_to_json(config_)},
              {"seed", options_.seed},
              {"url", options_.url},
              {"wall_s", summary.wall_s},
              {"trips", trips}};
  std::ofstream out(options_.out / kRunFile);
  out << run.dump(2) << '\n';
  if (!out) return make_error(ErrorCode::io_error, "cannot write run.json");
  return summary;
}

}  // namespace

Expected<RunSummary> run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  Run run(config, options);
  return run.execute();
}

}  // namespace rucs::sim
