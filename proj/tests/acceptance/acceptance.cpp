// One pass/fail line per acceptance criterion. `--criterion N` runs one;
// without it all seven run in order. Exit status is non-zero if any failed.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rucs/codec.hpp"
#include "rucs/http_server.hpp"
#include "rucs/service.hpp"
#include "rucs/sim/analysis.hpp"
#include "rucs/sim/client.hpp"
#include "rucs/sim/decision.hpp"
#include "rucs/sim/runner.hpp"
#include "rucs/sim/scenario.hpp"

namespace {

using namespace rucs;
using nlohmann::json;
using Steady = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed expectations; the first few end up in the detail text.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  [[nodiscard]] bool ok() const { return failures_ == 0; }
  Outcome outcome(std::string summary) const {
    if (ok()) return {true, std::move(summary)};
    return {false, summary + " | " + std::to_string(failures_) + " failed: " + notes_};
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

double seconds_since(Steady::time_point t) { return std::chrono::duration<double>(Steady::now() - t).count(); }

std::string fmt(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const std::filesystem::path& p) {
  try {
    return json::parse(slurp(p));
  } catch (const std::exception&) {
    return json();
  }
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A service on a free loopback port for the duration of one criterion.
struct LiveService {
  SystemClock clock;
  Service service;
  HttpServer server;
  bool started = false;

  explicit LiveService(Service::Options options = {})
      : service(clock, std::move(options)), server(service, HttpServer::Options{}) {
    started = server.start().has_value();
  }
  std::string url() const { return server.base_url(); }
};

// Drives Service::handle with a manual clock; used where HTTP adds nothing.
struct Facade {
  ManualClock clock;
  Service service;

  Facade() : service(clock, [] {
    Service::Options o;
    o.background_sweeper = false;
    return o;
  }()) {}

  ApiResponse call(const std::string& method, const std::string& path, const std::string& token = {},
                   const std::string& body = {}, std::map<std::string, std::string> query = {}) {
    return service.handle(ApiRequest{method, path, token.empty() ? "" : "Bearer " + token, body, std::move(query)});
  }
  ApiResponse post(const std::string& path, const std::string& token, const json& body) {
    return call("POST", path, token, body.dump());
  }

  struct User {
    std::string token;
    std::string trip;
  };

  std::optional<User> join(const std::string& plate, const std::string& credential,
                           json properties = {"drowsiness"}, json actions = {"yield_request"}) {
    auto r = post("/api/register", "",
                  json{{"credential", credential},
                       {"display_name", "driver"},
                       {"vehicle",
                        {{"model", "Sedan"},
                         {"year", 2020},
                         {"plate_number", plate},
                         {"color", "grey"},
                         {"exposed_properties", properties},
                         {"exposed_actions", actions}}}});
    if (r.status != 200) return std::nullopt;
    const std::string token = r.body.at("token");
    auto t = post("/api/trips", token, json{{"vehicle_id", r.body.at("vehicle_id")}});
    if (t.status != 200) return std::nullopt;
    return User{token, t.body.at("trip_id")};
  }

  ApiResponse state(const User& u, double lat, double lon) {
    return post("/api/trips/" + u.trip + "/state", u.token,
                json{{"location", {{"latitude", lat}, {"longitude", lon}, {"speed", 10.0}, {"heading", 45.0}}}});
  }
};

// Field-test reproduction through the CLI, twice with the same seed.
Outcome criterion1(const std::string& sim, const std::filesystem::path& work) {
  Checks c;
  LiveService live;
  if (!live.started) return {false, "could not start the service"};
  if (sim.empty()) return {false, "rucs-sim path not given"};

  std::vector<std::filesystem::path> dirs;
  double slowest = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto dir = work / ("c1-run" + std::to_string(i));
    std::filesystem::remove_all(dir);
    const auto started = Steady::now();
    const int code = run_command(shell_quote(sim) + " run --scenario field-test --seed 42 --url " +
                                 shell_quote(live.url()) + " --out " + shell_quote(dir.string()) + " > " +
                                 shell_quote((work / ("c1-run" + std::to_string(i) + ".log")).string()) + " 2>&1");
    slowest = std::max(slowest, seconds_since(started));
    c.expect(code == 0, "rucs-sim exited with " + std::to_string(code));
    dirs.push_back(dir);
  }

  const auto run = read_json(dirs[0] / sim::kRunFile);
  const std::string trip_b = run.is_object() ? run.at("trips").value("B", "") : "";
  c.expect(!trip_b.empty(), "run.json lacks trip of B");
  std::size_t b_states = 0;
  for (const auto& r : live.service.state_log().records(TripId{trip_b})) {
    if (!r.driver) continue;
    ++b_states;
    c.expect(r.driver->drowsiness == Drowsiness::low, "B streamed a drowsiness other than low");
  }
  c.expect(b_states > 0, "B streamed no driver state");

  std::string decision = "none";
  std::string level = "none";
  std::string binary = "none";
  std::istringstream lines(slurp(dirs[0] / sim::kDecisionsFile));
  std::string line;
  int decisions = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto d = json::parse(line);
    if (d.value("event", "") != "lane_change_decision" || d.value("vehicle", "") != "A") continue;
    ++decisions;
    decision = d.value("decision", "");
    level = d.at("result").at("value").value("level", "");
    binary = d.at("result").at("value").value("binary", "");
  }
  c.expect(decisions == 1, "expected one lane-change decision, got " + std::to_string(decisions));
  c.expect(level == "low" && binary == "non-drowsy", "drowsiness result was " + level + "/" + binary);
  c.expect(decision == "change_ahead", "decision was " + decision);

  for (const char* file : {sim::kRequestsFile, sim::kCountsFile}) {
    const auto a = slurp(dirs[0] / file);
    c.expect(!a.empty() && a == slurp(dirs[1] / file), std::string(file) + " differs between same-seed runs");
  }
  c.expect(slowest < 60.0, "run took " + fmt(slowest, 1) + " s");
  return c.outcome("drowsiness " + level + "/" + binary + ", decision " + decision + ", same-seed runs identical, " +
                   fmt(slowest, 1) + " s per run");
}

// 4G-profile run plus analysis; the distance formula at the reference point.
Outcome criterion2(const std::string& sim, const std::filesystem::path& work) {
  Checks c;
  LiveService live;
  if (!live.started) return {false, "could not start the service"};
  if (sim.empty()) return {false, "rucs-sim path not given"};
  const auto dir = work / "c2-run";
  std::filesystem::remove_all(dir);
  const int code = run_command(shell_quote(sim) + " run --scenario field-test-4g --seed 7 --analyze --url " +
                               shell_quote(live.url()) + " --out " + shell_quote(dir.string()) + " > " +
                               shell_quote((work / "c2-run.log").string()) + " 2>&1");
  c.expect(code == 0, "rucs-sim exited with " + std::to_string(code));
  const auto summary = read_json(dir / "report" / "summary.json");
  double mean = -1.0;
  if (summary.is_object() && summary.at("kinds").at("property").is_object()) {
    mean = summary.at("kinds").at("property").at("rtt_s").at("mean").get<double>();
    for (const auto& kind : sim::request_kinds()) {
      const auto& k = summary.at("kinds").at(kind);
      c.expect(k.is_object() && k.at("distance_m").is_object(), "no delay statistics for " + kind);
    }
  }
  c.expect(mean >= 0.06 && mean <= 0.25, "mean property rtt " + fmt(mean) + " s outside [0.06, 0.25]");
  c.expect(!slurp(dir / "report" / "delay_histogram.csv").empty(), "no delay histogram");
  c.expect(!slurp(dir / "report" / "distance_histogram.csv").empty(), "no distance histogram");

  const double d = sim::distance_during_delay(13.889, 0.25);
  c.expect(std::fabs(d - 3.472) <= 1e-3, "distance_during_delay(13.889, 0.25) = " + fmt(d, 5));
  c.expect(d < 3.5, "distance not below 3.5 m");
  return c.outcome("mean property rtt " + fmt(mean) + " s, distance_during_delay(13.889, 0.25) = " + fmt(d, 5) +
                   " m < 3.5 m");
}

// Neighbor queries through the service agree with a brute-force scan.
Outcome criterion3() {
  Checks c;
  std::mt19937_64 rng(3);
  const auto started = Steady::now();
  std::size_t queries = 0;
  std::size_t hits = 0;
  for (int config = 0; config < 200; ++config) {
    Facade f;
    const int n = 2 + static_cast<int>(rng() % 999);
    const double lat0 = std::uniform_real_distribution<double>(-70, 70)(rng);
    const double lon0 = std::uniform_real_distribution<double>(-179, 179)(rng);
    const double spread = std::uniform_real_distribution<double>(0.001, 0.05)(rng);
    std::uniform_real_distribution<double> jitter(-spread, spread);

    std::vector<Facade::User> users;
    std::vector<oracle::Snapshot> snaps;
    for (int i = 0; i < n; ++i) {
      auto u = f.join("P" + std::to_string(i), "pw" + std::to_string(i));
      if (!u) {
        c.expect(false, "registration failed");
        break;
      }
      users.push_back(*u);
    }
    // positions arrive over 40 s so some are stale at query time
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (rng() % 20 == 0) continue;  // some trips never report
      f.clock.advance_ms(static_cast<std::int64_t>(rng() % (80'000 / users.size() + 1)));
      const double lat = std::clamp(lat0 + jitter(rng), -90.0, 90.0);
      const double lon = lon0 + jitter(rng);
      if (f.state(users[i], lat, lon).status != 200) {
        c.expect(false, "state post rejected");
        continue;
      }
      snaps.push_back({users[i].trip, lat, lon, f.clock.now().ms});
    }
    if (snaps.empty()) continue;
    for (int q = 0; q < 3; ++q) {
      const auto& me = snaps[rng() % snaps.size()];
      const auto user = std::find_if(users.begin(), users.end(), [&](const auto& u) { return u.trip == me.trip; });
      const double radius = std::uniform_real_distribution<double>(1.0, spread * 111'000 * 2)(rng);
      // ages are whole milliseconds on both sides
      const double max_age = std::uniform_real_distribution<double>(0.5, 60.0)(rng);
      auto r = f.call("GET", "/api/trips/" + me.trip + "/neighbors", user->token, "",
                      {{"radius", fmt(radius, 6)}, {"max_age", fmt(max_age, 3)}});
      ++queries;
      if (r.status != 200) {
        c.expect(false, "neighbors returned " + std::to_string(r.status));
        continue;
      }
      const auto expected = oracle::brute_force_neighbors(snaps, me.trip, std::stod(fmt(radius, 6)),
                                                          std::stod(fmt(max_age, 3)), f.clock.now().ms);
      const auto& got = r.body.at("neighbors");
      hits += got.size();
      c.expect(got.size() == expected.size(), "config " + std::to_string(config) + ": " +
                                                  std::to_string(got.size()) + " neighbors, oracle " +
                                                  std::to_string(expected.size()));
      for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
        const double d = got[i].at("distance").get<double>();
        c.expect(got[i].at("trip") == expected[i].trip, "order differs in config " + std::to_string(config));
        c.expect(std::fabs(d - expected[i].distance) <= 1e-6 * std::max(1.0, expected[i].distance),
                 "distance differs in config " + std::to_string(config));
      }
    }
  }
  const double elapsed = seconds_since(started);
  c.expect(elapsed < 30.0, "took " + fmt(elapsed, 1) + " s");
  return c.outcome("200 configurations, " + std::to_string(queries) + " queries, " + std::to_string(hits) +
                   " neighbors matched the oracle in " + fmt(elapsed, 1) + " s");
}

// Action routing: delivery, 400 for unreachable targets, warm cache, timeout.
Outcome criterion4() {
  Checks c;
  Facade f;
  auto a = f.join("A", "pw-a");
  auto b = f.join("B", "pw-b");
  auto gone = f.join("C", "pw-c");
  if (!a || !b || !gone) return {false, "setup failed"};
  auto a_in = f.service.open_listen_stream("Bearer " + a->token, TripId{a->trip});
  auto b_in = f.service.open_listen_stream("Bearer " + b->token, TripId{b->trip});
  if (!a_in || !b_in) return {false, "listen streams failed"};
  const auto dispatch = [&](const std::string& target, double timeout) {
    return f.post("/api/trips/" + a->trip + "/requests/action", a->token,
                  json{{"target_trip", target}, {"action", "yield_request"}, {"payload", {{"side", "left"}}},
                       {"timeout_s", timeout}});
  };
  const auto respond = [&](const json& correlation) {
    return f.post("/api/trips/" + b->trip + "/responses/action", b->token,
                  json{{"correlation_id", correlation}, {"payload", {{"decision", "accept"}}}});
  };

  // (a)
  auto r = dispatch(b->trip, 5);
  c.expect(r.status >= 200 && r.status < 300, "(a) dispatch returned " + std::to_string(r.status));
  auto at_b = b_in->drain();
  c.expect(at_b.size() == 1, "(a) target got " + std::to_string(at_b.size()) + " envelopes");
  auto answer = respond(r.body.value("correlation_id", ""));
  c.expect(answer.status == 200, "(a) response returned " + std::to_string(answer.status));
  auto at_a = a_in->drain();
  c.expect(at_a.size() == 1 && at_a[0].correlation_id == r.body.value("correlation_id", "") &&
               at_a[0].payload == json{{"decision", "accept"}},
           "(a) requester did not get exactly one correlated response");

  // (b)
  c.expect(f.call("POST", "/api/trips/" + gone->trip + "/complete", gone->token).status == 200, "(b) complete");
  const int unknown = dispatch("t-does-not-exist", 5).status;
  const int completed = dispatch(gone->trip, 5).status;
  c.expect(unknown >= 400 && unknown < 500, "(b) unknown trip gave " + std::to_string(unknown));
  c.expect(completed >= 400 && completed < 500, "(b) completed trip gave " + std::to_string(completed));

  // (c) the target's topic is cached from (a)
  const auto reads = f.service.registry().store_reads();
  const auto hits = f.service.topic_cache().counters().hits;
  auto warm = dispatch(b->trip, 5);
  c.expect(warm.status == 200, "(c) warm dispatch failed");
  c.expect(f.service.registry().store_reads() == reads, "(c) warm dispatch read the trip store");
  c.expect(f.service.topic_cache().counters().hits == hits + 1, "(c) warm dispatch missed the cache");
  (void)respond(warm.body.value("correlation_id", ""));
  (void)b_in->drain();
  (void)a_in->drain();

  // (d) the answer arrives after the deadline, before and after the sweep
  for (bool sweep_first : {false, true}) {
    auto late = dispatch(b->trip, 1);
    (void)b_in->drain();
    f.clock.advance_ms(1500);
    if (sweep_first) (void)f.service.sweep();
    const int status = respond(late.body.value("correlation_id", "")).status;
    (void)f.service.sweep();
    c.expect(status == 410, "(d) late response gave " + std::to_string(status));
    const auto frames = a_in->drain();
    int notices = 0, responses = 0;
    for (const auto& e : frames) {
      if (e.correlation_id != late.body.value("correlation_id", "")) continue;
      (e.payload == json{{"error", "timeout"}} ? notices : responses) += 1;
    }
    c.expect(notices == 1 && responses == 0, "(d) requester saw " + std::to_string(notices) + " notices and " +
                                                 std::to_string(responses) + " late responses");
  }
  return c.outcome("(a) one envelope each way, (b) " + std::to_string(unknown) + "/" + std::to_string(completed) +
                   ", (c) zero store reads when warm, (d) one timeout notice, no late response");
}

class FixedHandler final : public PropertyHandler {
 public:
  FixedHandler(std::string name, json value) : name_(std::move(name)), value_(std::move(value)) {}
  [[nodiscard]] std::string name() const override { return name_; }
  [[nodiscard]] bool accepts(const PropertyName& p) const override { return p == "drowsiness"; }
  [[nodiscard]] Expected<HandlerOutput> run(const PropertyRequest&, const StateView&) const override {
    return HandlerOutput{value_, 0};
  }

 private:
  std::string name_;
  json value_;
};

class Renamed final : public PropertyHandler {
 public:
  Renamed(std::shared_ptr<const PropertyHandler> inner, PropertyName as) : inner_(std::move(inner)), as_(std::move(as)) {}
  [[nodiscard]] std::string name() const override { return as_; }
  [[nodiscard]] bool accepts(const PropertyName& p) const override { return p == as_; }
  [[nodiscard]] Expected<HandlerOutput> run(const PropertyRequest& r, const StateView& s) const override {
    return inner_->run(r, s);
  }

 private:
  std::shared_ptr<const PropertyHandler> inner_;
  PropertyName as_;
};

// Property handling: chain order, schema rejection, exposure, deferred.
Outcome criterion5() {
  Checks c;
  ManualClock clock;
  const TripId target{"B"};
  const TripId requester{"A"};

  HandlerChain chain;
  chain.add(std::make_shared<FixedHandler>("first", json::object()));
  chain.add(std::make_shared<FixedHandler>("second", json::object()));
  c.expect((*chain.get_handler("drowsiness"))->name() == "first", "tie went to a later handler");
  c.expect(chain.get_handler("heart_rate").error().code == ErrorCode::no_handler, "unknown property had a handler");

  StateLog log;
  log.open_trip(target);
  StateRecord r;
  r.trip = target;
  r.seq = 1;
  r.location = LocationState{48.18, 14.12, 13.9, 90.0};
  r.driver = DriverState{Drowsiness::low, clock.now()};
  (void)log.append_state(r);

  const auto catalog = Catalog::with_defaults();
  HandlerChain broken;
  broken.add(std::make_shared<FixedHandler>("broken", json{{"level", "sleepy"}, {"binary", "maybe"}}));
  PropertyEngine bad_engine(catalog, log, clock, std::move(broken), 0);
  auto rejected = bad_engine.handle_property({requester, target, "drowsiness", {}}, {"drowsiness"});
  c.expect(!rejected && rejected.error().code == ErrorCode::schema_invalid, "invalid handler output was returned");

  PropertyEngine engine(catalog, log, clock, HandlerChain::with_defaults(), 0);
  auto denied = engine.handle_property({requester, target, "drowsiness", {}}, {"automation_level"});
  c.expect(!denied && denied.error().code == ErrorCode::permission_denied, "unexposed property was answered");
  auto allowed = engine.handle_property({requester, target, "drowsiness", {}}, {"drowsiness"});
  c.expect(allowed && allowed->value.at("binary") == "non-drowsy", "exposed property failed");

  auto deferred_catalog = Catalog::with_defaults();
  for (const char* name : {"drowsiness", "automation_level"}) {
    auto entry = *deferred_catalog.lookup(name);
    entry.name = std::string(name) + "_deferred";
    entry.deferred = true;
    (void)deferred_catalog.add(entry);
  }
  auto deferred_chain = HandlerChain::with_defaults();
  deferred_chain.add(std::make_shared<Renamed>(std::make_shared<DrowsinessHandler>(), "drowsiness_deferred"));
  deferred_chain.add(std::make_shared<Renamed>(std::make_shared<AutomationLevelHandler>(), "automation_level_deferred"));
  const std::set<PropertyName> exposed{"drowsiness", "automation_level", "drowsiness_deferred",
                                       "automation_level_deferred"};

  std::mt19937_64 rng(5);
  int compared = 0;
  for (int round = 0; round < 100; ++round) {
    StateLog random_log;
    random_log.open_trip(target);
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 1; i <= n; ++i) {
      StateRecord s;
      s.trip = target;
      s.seq = i;
      s.recorded_at = clock.now();
      s.location = LocationState{48.18, 14.12, 13.9, 90.0};
      if (rng() % 2) s.driver = DriverState{static_cast<Drowsiness>(rng() % 4), clock.now()};
      if (rng() % 2) s.control = ControlState{static_cast<AutomationLevel>(rng() % 3), std::nullopt};
      (void)random_log.append_state(s);
    }
    PropertyEngine e(deferred_catalog, random_log, clock, deferred_chain, 2);
    for (const std::string p : {"drowsiness", "automation_level"}) {
      const auto sync = e.handle_property({requester, target, p, {}}, exposed);
      const auto deferred = e.request({requester, target, p + "_deferred", {}}, exposed, std::chrono::seconds(5));
      ++compared;
      if (sync && deferred) {
        c.expect(sync->value == deferred->value && sync->source_seq == deferred->source_seq,
                 "deferred result differs in round " + std::to_string(round));
      } else {
        c.expect(!sync && !deferred && sync.error().code == deferred.error().code,
                 "deferred outcome differs in round " + std::to_string(round));
      }
    }
  }
  return c.outcome("first handler wins, schema_invalid on bad output, permission_denied when unexposed, " +
                   std::to_string(compared) + " deferred/sync pairs identical over 100 logs");
}

// Random bodies for the privacy fuzzer; never reuses anyone's secrets.
json fuzz_value(std::mt19937_64& rng, int depth = 0) {
  switch (rng() % (depth > 1 ? 5 : 7)) {
    case 0: return nullptr;
    case 1: return static_cast<std::int64_t>(rng() % 2000) - 1000;
    case 2: return std::uniform_real_distribution<double>(-200, 200)(rng);
    case 3: return rng() % 2 == 0;
    case 4: {
      static const std::vector<std::string> words{"drowsiness", "automation_level", "yield_request", "left", "",
                                                  "low", "accept", "x", "teleport", "c-unknown"};
      return words[rng() % words.size()];
    }
    case 5: {
      json a = json::array();
      for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i) a.push_back(fuzz_value(rng, depth + 1));
      return a;
    }
    default: {
      static const std::vector<std::string> keys{"location", "latitude", "longitude", "speed", "heading", "driver",
                                                 "drowsiness", "target_trip", "property", "action", "payload",
                                                 "timeout_s", "correlation_id", "seq", "vehicle_id", "side"};
      json o = json::object();
      for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) o[keys[rng() % keys.size()]] = fuzz_value(rng, depth + 1);
      return o;
    }
  }
}

std::string random_hex(std::mt19937_64& rng, int n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < n; ++i) s += digits[rng() % 16];
  return s;
}

// No response body or stream frame reveals a user id or credential.
Outcome criterion6() {
  Checks c;
  std::mt19937_64 rng(6);
  std::size_t bodies = 0;
  std::size_t frames = 0;

  const auto scan = [&](const std::vector<std::string>& texts, const Registry& registry) {
    for (const auto& account : registry.accounts()) {
      for (const auto& text : texts) {
        c.expect(text.find(account.user_id.value) == std::string::npos, "a user_id leaked");
        c.expect(text.find(account.credential) == std::string::npos, "a credential leaked");
      }
    }
  };

  for (int session = 0; session < 1000; ++session) {
    Facade f;
    std::vector<std::string> seen;
    std::vector<Facade::User> users;
    const int n = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i) {
      const auto plate = "F" + std::to_string(i);
      const json exposed = rng() % 2 ? json{"drowsiness", "automation_level"} : json::array();
      auto reg = f.post("/api/register", "",
                        json{{"credential", "secret-" + random_hex(rng, 24)},
                             {"display_name", "name-" + random_hex(rng, 8)},
                             {"vehicle",
                              {{"model", "M"}, {"year", 2020}, {"plate_number", plate}, {"color", "c"},
                               {"exposed_properties", exposed}, {"exposed_actions", {"yield_request"}}}}});
      seen.push_back(reg.body.dump());
      if (reg.status != 200) continue;
      const std::string token = reg.body.at("token");
      auto trip = f.post("/api/trips", token, json{{"vehicle_id", reg.body.at("vehicle_id")}});
      seen.push_back(trip.body.dump());
      if (trip.status == 200) users.push_back({token, trip.body.at("trip_id")});
    }
    if (users.empty()) continue;
    std::vector<Subscription> streams;
    for (const auto& u : users) {
      if (auto s = f.service.open_listen_stream("Bearer " + u.token, TripId{u.trip})) streams.push_back(std::move(*s));
    }

    for (int step = 0; step < 12; ++step) {
      const auto& me = users[rng() % users.size()];
      const auto& other = users[rng() % users.size()];
      const std::string token = rng() % 10 == 0 ? "bad" : me.token;
      const std::string trip = rng() % 10 == 0 ? other.trip : me.trip;
      json body = fuzz_value(rng);
      if (rng() % 2 && body.is_object()) body["target_trip"] = other.trip;
      ApiResponse r;
      switch (rng() % 9) {
        case 0: r = f.state(me, 48 + (rng() % 100) * 1e-5, 14); break;
        case 1: r = f.post("/api/trips/" + trip + "/state", token, body); break;
        case 2: r = f.call("GET", "/api/trips/" + trip + "/neighbors", token); break;
        case 3:
          r = f.post("/api/trips/" + trip + "/requests/property", token,
                     json{{"target_trip", other.trip}, {"property", rng() % 2 ? "drowsiness" : "automation_level"}});
          break;
        case 4: r = f.post("/api/trips/" + trip + "/requests/property", token, body); break;
        case 5:
          r = f.post("/api/trips/" + trip + "/requests/action", token,
                     json{{"target_trip", other.trip}, {"action", "yield_request"}, {"timeout_s", 1}});
          break;
        case 6: r = f.post("/api/trips/" + trip + "/responses/action", token, body); break;
        case 7: r = f.call("GET", "/api/trips/" + trip + "/listen", token); break;
        default:
          f.clock.advance_ms(static_cast<std::int64_t>(rng() % 1500));
          (void)f.service.sweep();
          r = f.call(rng() % 2 ? "GET" : "POST", "/api/trips/" + trip + "/" + random_hex(rng, 4), token,
                     body.dump());
      }
      seen.push_back(r.body.dump());
      // answer pending actions so responses also travel
      for (auto& s : streams) {
        for (const auto& e : s.drain()) {
          seen.push_back(json(e).dump());
          ++frames;
          if (e.kind == EnvelopeKind::action_request) {
            const auto responder = std::find_if(users.begin(), users.end(),
                                                [&](const auto& u) { return listen_topic_for(TripId{u.trip}) == e.topic; });
            if (responder != users.end()) {
              auto answer = f.post("/api/trips/" + responder->trip + "/responses/action", responder->token,
                                   json{{"correlation_id", e.correlation_id}, {"payload", {{"decision", "accept"}}}});
              seen.push_back(answer.body.dump());
            }
          }
        }
      }
    }
    if (rng() % 3 == 0) seen.push_back(f.call("POST", "/api/trips/" + users[0].trip + "/complete", users[0].token).body.dump());
    for (auto& s : streams) {
      for (const auto& e : s.drain()) {
        seen.push_back(json(e).dump());
        ++frames;
      }
    }
    bodies += seen.size();
    scan(seen, f.service.registry());
  }

  // The same over real HTTP, including streamed frames.
  LiveService live;
  if (!live.started) return {false, "could not start the service"};
  std::vector<std::string> seen;
  std::mutex seen_mutex;
  for (int session = 0; session < 10; ++session) {
    sim::ServiceClient ca(live.url()), cb(live.url());
    std::string tokens[2], trips[2];
    sim::ServiceClient* clients[2] = {&ca, &cb};
    for (int i = 0; i < 2; ++i) {
      auto reg = clients[i]->post("/api/register",
                                  json{{"credential", "secret-" + random_hex(rng, 24)},
                                       {"vehicle",
                                        {{"model", "M"}, {"year", 2020},
                                         {"plate_number", "H" + std::to_string(session) + "-" + std::to_string(i)},
                                         {"color", "c"}, {"exposed_properties", {"drowsiness"}},
                                         {"exposed_actions", {"yield_request"}}}}});
      if (!reg || reg->status != 200) return {false, "http registration failed"};
      seen.push_back(reg->body.dump());
      tokens[i] = reg->body.at("token");
      clients[i]->set_token(tokens[i]);
      auto trip = clients[i]->post("/api/trips", json{{"vehicle_id", reg->body.at("vehicle_id")}});
      seen.push_back(trip->body.dump());
      trips[i] = trip->body.at("trip_id");
      auto st = clients[i]->post("/api/trips/" + trips[i] + "/state",
                                 json{{"location", {{"latitude", 48.18}, {"longitude", 14.12}, {"speed", 1}, {"heading", 0}}},
                                      {"driver", {{"drowsiness", "low"}}}});
      seen.push_back(st->body.dump());
    }
    std::vector<std::string> streamed;
    const auto keep = [&](const Envelope& e) {
      std::lock_guard lock(seen_mutex);
      streamed.push_back(json(e).dump());
    };
    sim::ListenStream sa(live.url(), tokens[0], trips[0], keep);
    sim::ListenStream sb(live.url(), tokens[1], trips[1], keep);
    (void)sa.wait_open(std::chrono::seconds(2));
    (void)sb.wait_open(std::chrono::seconds(2));
    seen.push_back(ca.get("/api/trips/" + trips[0] + "/neighbors")->body.dump());
    seen.push_back(ca.post("/api/trips/" + trips[0] + "/requests/property",
                           json{{"target_trip", trips[1]}, {"property", "drowsiness"}})->body.dump());
    auto act = ca.post("/api/trips/" + trips[0] + "/requests/action",
                       json{{"target_trip", trips[1]}, {"action", "yield_request"}, {"timeout_s", 2}});
    seen.push_back(act->body.dump());
    seen.push_back(cb.post("/api/trips/" + trips[1] + "/responses/action",
                           json{{"correlation_id", act->body.value("correlation_id", "")},
                                {"payload", {{"decision", "accept"}}}})->body.dump());
    seen.push_back(cb.get("/api/trips/" + trips[0] + "/listen")->body.dump());
    for (int i = 0; i < 100; ++i) {
      {
        std::lock_guard lock(seen_mutex);
        if (streamed.size() >= 2) break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    sa.stop();
    sb.stop();
    std::lock_guard lock(seen_mutex);
    c.expect(streamed.size() >= 2, "http streams carried " + std::to_string(streamed.size()) + " frames");
    frames += streamed.size();
    seen.insert(seen.end(), streamed.begin(), streamed.end());
  }
  bodies += seen.size();
  scan(seen, live.service.registry());
  return c.outcome("1000 in-process sessions and 10 http sessions: " + std::to_string(bodies) + " bodies and " +
                   std::to_string(frames) + " frames, no user_id or credential");
}

// 20 vehicles at 1 Hz for 60 s against a loopback service.
Outcome criterion7(const std::filesystem::path& work) {
  Checks c;
  LiveService live;
  if (!live.started) return {false, "could not start the service"};
  const auto dir = work / "c7-run";
  std::filesystem::remove_all(dir);
  auto run = sim::run_scenario(sim::load_scenario_preset(20, 60.0), sim::RunOptions{live.url(), 1, dir, 3});
  if (!run) return {false, "run failed: " + run.error().message};
  auto report = sim::analyze_run(dir);
  if (!report) return {false, "analysis failed: " + report.error().message};
  c.expect(run->errors == 0, std::to_string(run->errors) + " request errors");
  const auto& all = report->summary.at("all");
  const double p95 = all.is_object() ? all.at("server_processing_s").at("p95").get<double>() : 1e9;
  const auto requests = all.is_object() ? all.at("rtt_s").at("count").get<std::size_t>() : 0;
  c.expect(p95 < 0.050, "p95 server processing " + fmt(p95 * 1000.0, 2) + " ms");
  // 20 vehicles x 60 s x (state + neighbors) at 1 Hz, give or take the edges
  c.expect(requests >= 2 * 20 * 58, "only " + std::to_string(requests) + " requests");
  return c.outcome(std::to_string(requests) + " requests, " + std::to_string(run->errors) +
                   " errors, p95 server processing " + fmt(p95 * 1000.0, 3) + " ms, wall " + fmt(run->wall_s, 1) + " s");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  std::string sim;
  std::string work = (std::filesystem::temp_directory_path() / "rucs-acceptance").string();
  app.add_option("--criterion", only, "Run a single criterion (1-7)")->check(CLI::Range(1, 7));
  app.add_option("--sim", sim, "Path to the rucs-sim binary");
  app.add_option("--work", work, "Scratch directory for run logs");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(work);
  const std::vector<std::function<Outcome()>> criteria{
      [&] { return criterion1(sim, work); }, [&] { return criterion2(sim, work); }, criterion3, criterion4,
      criterion5, criterion6, [&] { return criterion7(work); }};

  bool all = true;
  for (int i = 1; i <= 7; ++i) {
    if (only != 0 && only != i) continue;
    Outcome o;
    try {
      o = criteria[i - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << i << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
