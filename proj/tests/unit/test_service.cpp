#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "rucs/http_server.hpp"
#include "rucs/service.hpp"

using namespace rucs;
using nlohmann::json;

namespace {

Service::Options quiet_options() {
  Service::Options o;
  o.background_sweeper = false;
  return o;
}

// Thin driver over Service::handle that keeps the call sites short.
struct Api {
  ManualClock clock;
  Service service{clock, quiet_options()};

  ApiResponse call(std::string method, std::string path, std::string token = {}, std::string body = {},
                   std::map<std::string, std::string> query = {}) {
    return service.handle(ApiRequest{std::move(method), std::move(path), token.empty() ? "" : "Bearer " + token,
                                     std::move(body), std::move(query)});
  }
  ApiResponse post(const std::string& path, const std::string& token, const json& body) {
    return call("POST", path, token, body.dump());
  }

  struct User {
    std::string token;
    std::string vehicle;
    std::string trip;
  };

  User join(const std::string& plate, json exposed_properties = {"drowsiness"}) {
    auto r = post("/api/register", "",
                  json{{"credential", "pw-" + plate},
                       {"display_name", "driver " + plate},
                       {"vehicle",
                        {{"model", "research vehicle"},
                         {"year", 2021},
                         {"plate_number", plate},
                         {"color", "white"},
                         {"exposed_properties", exposed_properties},
                         {"exposed_actions", {"yield_request"}}}}});
    REQUIRE(r.status == 200);
    User u{r.body.at("token"), r.body.at("vehicle_id"), {}};
    auto t = post("/api/trips", u.token, json{{"vehicle_id", u.vehicle}});
    REQUIRE(t.status == 200);
    u.trip = t.body.at("trip_id");
    return u;
  }

  ApiResponse state(const User& u, double lat, double lon, std::optional<std::string> drowsiness = std::nullopt) {
    json body{{"location", {{"latitude", lat}, {"longitude", lon}, {"speed", 13.9}, {"heading", 90.0}}}};
    if (drowsiness) body["driver"] = {{"drowsiness", *drowsiness}};
    return post("/api/trips/" + u.trip + "/state", u.token, body);
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("api-service") {
  TEST_CASE("register issues a token; duplicate plate and bad exposure are rejected") {
    Api api;
    auto body = json{{"credential", "pw"},
                     {"display_name", "Anna"},
                     {"vehicle",
                      {{"model", "research vehicle"},
                       {"year", 2021},
                       {"plate_number", "JKU-ITS"},
                       {"color", "white"},
                       {"exposed_properties", {"drowsiness"}}}}};
    auto r = api.post("/api/register", "", body);
    REQUIRE(r.status == 200);
    CHECK_FALSE(r.body.at("token").get<std::string>().empty());
    CHECK(r.body.contains("vehicle_id"));

    auto dup = api.post("/api/register", "", body);
    CHECK(dup.status == 409);
    CHECK(dup.body.at("error") == "duplicate_plate");

    body["vehicle"]["plate_number"] = "OTHER";
    body["vehicle"]["exposed_properties"] = {"teleport"};
    auto bad = api.post("/api/register", "", body);
    CHECK(bad.status == 400);
    CHECK(bad.body.at("error") == "invalid_exposure");
  }

  TEST_CASE("start trip returns the two topics") {
    Api api;
    auto r = api.post("/api/register", "",
                      json{{"credential", "pw"},
                           {"vehicle", {{"model", "m"}, {"year", 2020}, {"plate_number", "P"}, {"color", "c"}}}});
    const std::string token = r.body.at("token");
    const std::string vehicle = r.body.at("vehicle_id");
    auto t = api.post("/api/trips", token, json{{"vehicle_id", vehicle}});
    REQUIRE(t.status == 200);
    const std::string trip = t.body.at("trip_id");
    CHECK(t.body.at("listen_topic") == "trip." + trip + ".in");
    CHECK(t.body.at("send_topic") == "trip." + trip + ".out");
    CHECK(api.service.broker().has_topic("trip." + trip + ".in"));
    CHECK(api.service.broker().has_topic("trip." + trip + ".out"));

    auto again = api.post("/api/trips", token, json{{"vehicle_id", vehicle}});
    CHECK(again.status == 409);
    CHECK(again.body.at("error") == "trip_already_active");
    CHECK(api.post("/api/trips", "bogus", json{{"vehicle_id", vehicle}}).status == 401);
  }

  TEST_CASE("state posts feed neighbor queries") {
    Api api;
    auto a = api.join("A");
    auto b = api.join("B");
    REQUIRE(api.state(a, 48.18, 14.12).status == 200);
    auto s = api.state(b, 48.1801, 14.12, "low");
    REQUIRE(s.status == 200);
    CHECK(s.body.at("seq") == 1);
    auto n = api.call("GET", "/api/trips/" + a.trip + "/neighbors", a.token, "", {{"radius", "100"}});
    REQUIRE(n.status == 200);
    REQUIRE(n.body.at("neighbors").size() == 1);
    CHECK(n.body.at("neighbors")[0].at("trip") == b.trip);
    CHECK(n.body.at("radius_m") == 100.0);
    CHECK(n.body.at("max_age_s") == 10.0);
  }

  TEST_CASE("state for another user's trip and malformed bodies") {
    Api api;
    auto a = api.join("A");
    auto b = api.join("B");
    auto foreign = api.post("/api/trips/" + b.trip + "/state", a.token,
                            json{{"location", {{"latitude", 1}, {"longitude", 1}, {"speed", 1}, {"heading", 1}}}});
    CHECK(foreign.status == 403);
    CHECK(api.call("POST", "/api/trips/" + a.trip + "/state", a.token, "{not json").status == 400);
    CHECK(api.call("POST", "/api/trips/" + a.trip + "/state", a.token, "[]").status == 400);
    CHECK(api.post("/api/trips/" + a.trip + "/state", a.token, json::object()).body.at("error") == "missing_location");
    CHECK(api.state(a, 91, 0).body.at("error") == "range_violation");
    auto neighbors = api.call("GET", "/api/trips/" + a.trip + "/neighbors", a.token, "", {{"radius", "abc"}});
    CHECK(neighbors.status == 400);
    CHECK(api.call("GET", "/api/trips/" + a.trip + "/neighbors", a.token).body.at("error") == "no_own_position");
  }

  TEST_CASE("property request: the field-test transaction") {
    Api api;
    auto a = api.join("A", json::array());
    auto b = api.join("B", {"drowsiness"});
    REQUIRE(api.state(b, 48.18, 14.12, "low").status == 200);
    auto r = api.post("/api/trips/" + a.trip + "/requests/property", a.token,
                      json{{"target_trip", b.trip}, {"property", "drowsiness"}});
    REQUIRE(r.status == 200);
    CHECK(r.body.at("value").at("level") == "low");
    CHECK(r.body.at("value").at("binary") == "non-drowsy");
    CHECK(r.body.at("target_trip") == b.trip);

    auto denied = api.post("/api/trips/" + b.trip + "/requests/property", b.token,
                           json{{"target_trip", a.trip}, {"property", "drowsiness"}});
    CHECK(denied.status == 403);
    CHECK(denied.body.at("error") == "permission_denied");
    auto unknown = api.post("/api/trips/" + a.trip + "/requests/property", a.token,
                            json{{"target_trip", b.trip}, {"property", "heart_rate"}});
    CHECK(unknown.status == 404);
  }

  TEST_CASE("action request, response and listen") {
    Api api;
    auto a = api.join("A");
    auto b = api.join("B");
    auto r = api.post("/api/trips/" + a.trip + "/requests/action", a.token,
                      json{{"target_trip", b.trip}, {"action", "yield_request"}, {"payload", {{"side", "left"}}}});
    REQUIRE(r.status == 200);
    CHECK(r.body.at("status") == "accepted");
    const std::string correlation = r.body.at("correlation_id");

    // Nothing is retained for a listener that was not connected.
    auto b_listen = api.call("GET", "/api/trips/" + b.trip + "/listen", b.token);
    REQUIRE(b_listen.status == 200);
    CHECK(b_listen.body.at("envelopes").empty());

    auto sub = api.service.open_listen_stream("Bearer " + a.token, TripId{a.trip});
    REQUIRE(sub);
    auto answer = api.post("/api/trips/" + b.trip + "/responses/action", b.token,
                           json{{"correlation_id", correlation}, {"action", "yield_request"},
                                {"payload", {{"decision", "accept"}}}});
    REQUIRE(answer.status == 200);
    CHECK(answer.body.at("status") == "forwarded");
    auto e = sub->try_next();
    REQUIRE(e);
    CHECK(e->correlation_id == correlation);
    CHECK(e->payload.at("decision") == "accept");

    auto to_ghost = api.post("/api/trips/" + a.trip + "/requests/action", a.token,
                             json{{"target_trip", "ghost"}, {"action", "yield_request"}});
    CHECK(to_ghost.status == 400);
    CHECK(to_ghost.body.at("error") == "no_topic");
    auto bad_timeout = api.post("/api/trips/" + a.trip + "/requests/action", a.token,
                                json{{"target_trip", b.trip}, {"action", "yield_request"}, {"timeout_s", 31}});
    CHECK(bad_timeout.status == 400);
  }

  TEST_CASE("a late response after the sweep is gone") {
    Api api;
    auto a = api.join("A");
    auto b = api.join("B");
    auto sub = api.service.open_listen_stream("Bearer " + a.token, TripId{a.trip});
    auto r = api.post("/api/trips/" + a.trip + "/requests/action", a.token,
                      json{{"target_trip", b.trip}, {"action", "yield_request"}, {"timeout_s", 1}});
    REQUIRE(r.status == 200);
    api.clock.advance_ms(1001);
    CHECK(api.service.sweep() == 1);
    auto late = api.post("/api/trips/" + b.trip + "/responses/action", b.token,
                         json{{"correlation_id", r.body.at("correlation_id")}, {"payload", {{"decision", "accept"}}}});
    CHECK(late.status == 410);
    const auto frames = sub->drain();
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].payload == json{{"error", "timeout"}});
  }

  TEST_CASE("complete trip") {
    Api api;
    auto a = api.join("A");
    auto b = api.join("B");
    REQUIRE(api.state(a, 48.18, 14.12).status == 200);
    REQUIRE(api.state(b, 48.1801, 14.12).status == 200);
    auto done = api.call("POST", "/api/trips/" + b.trip + "/complete", b.token);
    REQUIRE(done.status == 200);
    CHECK(done.body.at("status") == "completed");
    CHECK(api.state(b, 48.18, 14.12).body.at("error") == "trip_not_active");
    auto twice = api.call("POST", "/api/trips/" + b.trip + "/complete", b.token);
    CHECK(twice.status == 409);
    CHECK(twice.body.at("error") == "trip_not_active");
    auto n = api.call("GET", "/api/trips/" + a.trip + "/neighbors", a.token);
    REQUIRE(n.status == 200);
    CHECK(n.body.at("neighbors").empty());
    CHECK_FALSE(api.service.broker().has_topic("trip." + b.trip + ".in"));
    CHECK(api.service.geo_index().size() == 1);
  }

  TEST_CASE("every endpoint except register and health rejects missing or invalid tokens") {
    Api api;
    auto a = api.join("A");
    const std::vector<std::pair<std::string, std::string>> endpoints{
        {"POST", "/api/trips"},
        {"POST", "/api/trips/" + a.trip + "/state"},
        {"GET", "/api/trips/" + a.trip + "/neighbors"},
        {"POST", "/api/trips/" + a.trip + "/requests/property"},
        {"POST", "/api/trips/" + a.trip + "/requests/action"},
        {"POST", "/api/trips/" + a.trip + "/responses/action"},
        {"POST", "/api/trips/" + a.trip + "/complete"},
        {"GET", "/api/trips/" + a.trip + "/listen"},
    };
    for (const auto& [method, path] : endpoints) {
      for (const std::string& auth : std::vector<std::string>{"", "Bearer ", "Bearer nope", "Basic abc", a.token}) {
        CAPTURE(method);
        CAPTURE(path);
        CAPTURE(auth);
        auto r = api.service.handle(ApiRequest{method, path, auth, "{}", {}});
        CHECK(r.status == 401);
        CHECK(r.body.at("error") == "unauthorized");
      }
    }
    CHECK(api.call("GET", "/healthz").status == 200);
  }

  TEST_CASE("foreign and unknown trips are forbidden") {
    Api api;
    auto a = api.join("A");
    auto b = api.join("B");
    for (const std::string& trip : std::vector<std::string>{b.trip, "t-unknown", "bad id!"}) {
      CAPTURE(trip);
      CHECK(api.call("GET", "/api/trips/" + trip + "/neighbors", a.token).status == 403);
      CHECK(api.call("GET", "/api/trips/" + trip + "/listen", a.token).status == 403);
      CHECK(api.call("POST", "/api/trips/" + trip + "/complete", a.token).status == 403);
    }
    CHECK(api.call("GET", "/api/nothing", a.token).status == 404);
  }

  TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::bad_request) == 400);
    CHECK(http_status(ErrorCode::missing_location) == 400);
    CHECK(http_status(ErrorCode::range_violation) == 400);
    CHECK(http_status(ErrorCode::no_topic) == 400);
    CHECK(http_status(ErrorCode::invalid_timeout) == 400);
    CHECK(http_status(ErrorCode::unauthorized) == 401);
    CHECK(http_status(ErrorCode::forbidden) == 403);
    CHECK(http_status(ErrorCode::permission_denied) == 403);
    CHECK(http_status(ErrorCode::no_data) == 404);
    CHECK(http_status(ErrorCode::trip_not_active) == 409);
    CHECK(http_status(ErrorCode::expired) == 410);
    CHECK(http_status(ErrorCode::schema_invalid) == 500);
  }

  TEST_CASE("processing delay is reflected in processing time") {
    ManualClock clock;
    auto options = quiet_options();
    options.config.processing_delay_ms = 20;
    Service service(clock, options);
    auto r = service.handle(ApiRequest{"GET", "/healthz", "", "", {}});
    CHECK(r.processing_ms >= 20.0);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults and overrides") {
    auto c = config_from_json(json{{"port", 9000}, {"default_radius_m", 150.0}, {"deferred_workers", 4}});
    REQUIRE(c);
    CHECK(c->port == 9000);
    CHECK(c->default_radius_m == 150.0);
    CHECK(c->default_max_age_s == 10.0);
    CHECK(c->deferred_workers == 4);
    auto back = config_from_json(config_to_json(*c));
    REQUIRE(back);
    CHECK(back->port == 9000);
  }

  TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_FALSE(config_from_json(json{{"prot", 9000}}));
    CHECK_FALSE(config_from_json(json{{"port", "x"}}));
    CHECK_FALSE(config_from_json(json{{"action_timeout_s", 31}}));
    CHECK_FALSE(config_from_json(json::array()));
    CHECK(load_config("/nonexistent/rucs.json").error().code == ErrorCode::not_found);
  }

  TEST_CASE("the environment variable overrides the command line path") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto file = dir / "rucs-config-test.json";
    {
      std::ofstream out(file);
      out << R"({"port": 9123, "default_max_age_s": 5})";
    }
    ::unsetenv(kConfigEnvVar);
    CHECK(resolve_config_path(std::filesystem::path("cli.json")) == std::filesystem::path("cli.json"));
    CHECK_FALSE(resolve_config_path(std::nullopt));
    ::setenv(kConfigEnvVar, file.c_str(), 1);
    const auto path = resolve_config_path(std::filesystem::path("cli.json"));
    ::unsetenv(kConfigEnvVar);
    REQUIRE(path);
    auto c = load_config(*path);
    REQUIRE(c);
    CHECK(c->port == 9123);
    CHECK(c->default_max_age_s == 5.0);
    std::filesystem::remove(file);
  }

  TEST_CASE("published property schemas match the catalog") {
    const std::filesystem::path dir = RUCS_SOURCE_DIR "/docs/properties";
    const std::vector<std::pair<std::string, json>> docs{
        {"drowsiness.schema.json", schemas::drowsiness_result()},
        {"automation_level.schema.json", schemas::automation_level_result()},
        {"yield_request.payload.schema.json", schemas::yield_request_payload()},
        {"yield_request.response.schema.json", schemas::yield_request_response()},
    };
    for (const auto& [name, schema] : docs) {
      CAPTURE(name);
      CHECK(json::parse(slurp(dir / name)) == schema);
    }
  }
}
