#include <doctest.h>

#include <httplib.h>

#include <mutex>
#include <thread>

#include "rucs/http_server.hpp"
#include "rucs/sim/client.hpp"

using namespace rucs;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

struct Live {
  SystemClock clock;
  Service service{clock};
  HttpServer server{service, HttpServer::Options{"127.0.0.1", 0, 8, std::chrono::milliseconds(200)}};
  std::string url;

  Live() {
    auto port = server.start();
    REQUIRE(port);
    url = server.base_url();
  }

  struct User {
    std::string token;
    std::string trip;
  };

  User join(sim::ServiceClient& client, const std::string& plate) {
    auto r = client.post("/api/register",
                         json{{"credential", "pw-" + plate},
                              {"vehicle",
                               {{"model", "m"},
                                {"year", 2020},
                                {"plate_number", plate},
                                {"color", "c"},
                                {"exposed_properties", {"drowsiness"}},
                                {"exposed_actions", {"yield_request"}}}}});
    REQUIRE(r);
    REQUIRE(r->status == 200);
    client.set_token(r->body.at("token"));
    auto t = client.post("/api/trips", json{{"vehicle_id", r->body.at("vehicle_id")}});
    REQUIRE(t);
    REQUIRE(t->status == 200);
    return User{r->body.at("token"), t->body.at("trip_id")};
  }
};

struct Collector {
  std::mutex mutex;
  std::vector<Envelope> seen;
  void operator()(const Envelope& e) {
    std::lock_guard lock(mutex);
    seen.push_back(e);
  }
  std::vector<Envelope> wait_for(std::size_t n, std::chrono::milliseconds timeout = 3000ms) {
    const auto until = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < until) {
      {
        std::lock_guard lock(mutex);
        if (seen.size() >= n) return seen;
      }
      std::this_thread::sleep_for(5ms);
    }
    std::lock_guard lock(mutex);
    return seen;
  }
};

}  // namespace

TEST_SUITE("http") {
  TEST_CASE("json endpoints carry the processing time header") {
    Live live;
    httplib::Client raw(live.url);
    auto health = raw.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->has_header(kProcessingTimeHeader));
    CHECK(std::stod(health->get_header_value(kProcessingTimeHeader)) >= 0.0);

    auto bad = raw.Post("/api/register", "{", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).at("error") == "bad_request");
    CHECK(bad->has_header(kProcessingTimeHeader));

    auto missing = raw.Get("/api/nowhere");
    REQUIRE(missing);
    CHECK(missing->status == 404);
  }

  TEST_CASE("full exchange over http") {
    Live live;
    sim::ServiceClient ca(live.url), cb(live.url);
    auto a = live.join(ca, "A");
    auto b = live.join(cb, "B");
    const json where{{"latitude", 48.18}, {"longitude", 14.12}, {"speed", 13.9}, {"heading", 90.0}};
    REQUIRE(ca.post("/api/trips/" + a.trip + "/state", json{{"location", where}})->status == 200);
    REQUIRE(cb.post("/api/trips/" + b.trip + "/state", json{{"location", where}, {"driver", {{"drowsiness", "low"}}}})
                ->status == 200);
    auto n = ca.get("/api/trips/" + a.trip + "/neighbors?radius=50&max_age=5");
    REQUIRE(n);
    REQUIRE(n->status == 200);
    CHECK(n->body.at("radius_m") == 50.0);
    REQUIRE(n->body.at("neighbors").size() == 1);
    CHECK(n->rtt_s > 0.0);
    CHECK(n->server_processing_s <= n->rtt_s);

    auto p = ca.post("/api/trips/" + a.trip + "/requests/property",
                     json{{"target_trip", b.trip}, {"property", "drowsiness"}});
    REQUIRE(p);
    CHECK(p->body.at("value").at("binary") == "non-drowsy");

    Collector at_b, at_a;
    sim::ListenStream sb(live.url, b.token, b.trip, std::ref(at_b));
    sim::ListenStream sa(live.url, a.token, a.trip, std::ref(at_a));
    REQUIRE(sb.wait_open(2000ms));
    REQUIRE(sa.wait_open(2000ms));

    auto r = ca.post("/api/trips/" + a.trip + "/requests/action",
                     json{{"target_trip", b.trip}, {"action", "yield_request"}, {"payload", {{"side", "left"}}}});
    REQUIRE(r);
    REQUIRE(r->status == 200);
    const std::string correlation = r->body.at("correlation_id");
    auto got = at_b.wait_for(1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].kind == EnvelopeKind::action_request);
    CHECK(got[0].correlation_id == correlation);

    auto answer = cb.post("/api/trips/" + b.trip + "/responses/action",
                          json{{"correlation_id", correlation}, {"payload", {{"decision", "accept"}}}});
    REQUIRE(answer);
    CHECK(answer->status == 200);
    auto reply = at_a.wait_for(1);
    REQUIRE(reply.size() == 1);
    CHECK(reply[0].payload == json{{"decision", "accept"}});

    REQUIRE(cb.post("/api/trips/" + b.trip + "/complete", json::object())->status == 200);
    // the service ends b's stream once the trip is done
    for (int i = 0; i < 100 && live.service.broker().subscriber_count("trip." + b.trip + ".in") > 0; ++i) {
      std::this_thread::sleep_for(10ms);
    }
    sb.stop();
    sa.stop();
  }

  TEST_CASE("a stranger cannot open someone else's stream") {
    Live live;
    sim::ServiceClient ca(live.url), cb(live.url);
    auto a = live.join(ca, "A");
    auto b = live.join(cb, "B");
    Collector sink;
    sim::ListenStream stolen(live.url, a.token, b.trip, std::ref(sink));
    CHECK_FALSE(stolen.wait_open(2000ms));
    httplib::Client raw(live.url);
    auto res = raw.Get("/api/trips/" + b.trip + "/listen", httplib::Headers{{"Authorization", "Bearer " + a.token}});
    REQUIRE(res);
    CHECK(res->status == 403);
    auto anonymous = raw.Get("/api/trips/" + b.trip + "/listen");
    REQUIRE(anonymous);
    CHECK(anonymous->status == 401);
  }

  TEST_CASE("reconnecting does not replay earlier envelopes") {
    Live live;
    sim::ServiceClient ca(live.url), cb(live.url);
    auto a = live.join(ca, "A");
    auto b = live.join(cb, "B");
    const auto send = [&](const std::string& note) {
      auto r = ca.post("/api/trips/" + a.trip + "/requests/action",
                       json{{"target_trip", b.trip}, {"action", "yield_request"}, {"payload", {{"note", note}}}});
      REQUIRE(r);
      REQUIRE(r->status == 200);
    };
    {
      Collector first;
      sim::ListenStream s(live.url, b.token, b.trip, std::ref(first));
      REQUIRE(s.wait_open(2000ms));
      send("one");
      REQUIRE(first.wait_for(1).size() == 1);
      s.stop();
    }
    send("while away");
    Collector second;
    sim::ListenStream s(live.url, b.token, b.trip, std::ref(second));
    REQUIRE(s.wait_open(2000ms));
    send("two");
    auto got = second.wait_for(1);
    std::this_thread::sleep_for(100ms);
    got = second.wait_for(1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].payload.at("note") == "two");
    s.stop();
  }

  TEST_CASE("an unreachable service") {
    sim::ServiceClient client("http://127.0.0.1:1");
    auto r = client.get("/healthz");
    REQUIRE_FALSE(r);
    CHECK(r.error().code == ErrorCode::service_unreachable);
    CHECK(sim::wait_healthy("http://127.0.0.1:1", 1).error().code == ErrorCode::service_unreachable);
  }
}
