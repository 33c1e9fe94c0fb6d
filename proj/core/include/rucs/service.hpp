#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "rucs/action_router.hpp"
#include "rucs/broker.hpp"
#include "rucs/catalog.hpp"
#include "rucs/clock.hpp"
#include "rucs/config.hpp"
#include "rucs/geo_index.hpp"
#include "rucs/property_engine.hpp"
#include "rucs/registry.hpp"
#include "rucs/state_log.hpp"
#include "rucs/ttl_cache.hpp"

namespace rucs {

// Transport-independent request as the HTTP layer sees it.
struct ApiRequest {
  std::string method;
  std::string path;
  // Raw value of the Authorization header.
  std::string authorization;
  std::string body;
  std::map<std::string, std::string> query;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
  double processing_ms = 0.0;
};

inline constexpr const char* kProcessingTimeHeader = "X-Processing-Time-Ms";

// The road user communication service. Owns every component and exposes
// the request types of the public API. Safe to call from many threads.
class Service {
 public:
  struct Options {
    ServiceConfig config;
    Catalog catalog = Catalog::with_defaults();
    HandlerChain handlers = HandlerChain::with_defaults();
    // Periodic timeout sweep for pending actions; tests drive sweep() by hand.
    bool background_sweeper = true;
  };

  Service(const Clock& clock, Options options);
  explicit Service(const Clock& clock) : Service(clock, Options{}) {}
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Routes by method and path; never throws.
  ApiResponse handle(const ApiRequest& request);

  Expected<nlohmann::json> register_user(const nlohmann::json& body);
  Expected<nlohmann::json> start_trip(std::string_view authorization, const nlohmann::json& body);
  Expected<nlohmann::json> post_state(std::string_view authorization, const TripId& trip, const nlohmann::json& body);
  Expected<nlohmann::json> get_neighbors(std::string_view authorization, const TripId& trip,
                                         std::optional<double> radius_m, std::optional<double> max_age_s);
  Expected<nlohmann::json> request_property(std::string_view authorization, const TripId& trip,
                                            const nlohmann::json& body);
  Expected<nlohmann::json> request_action(std::string_view authorization, const TripId& trip,
                                          const nlohmann::json& body);
  Expected<nlohmann::json> respond_action(std::string_view authorization, const TripId& trip,
                                          const nlohmann::json& body);
  Expected<nlohmann::json> complete_trip(std::string_view authorization, const TripId& trip);
  // Subscription on the trip's listen topic; the caller must own the trip.
  Expected<Subscription> open_listen_stream(std::string_view authorization, const TripId& trip);

  // Sends timeout notices for overdue actions.
  std::size_t sweep() { return router_.expire_due(); }

  [[nodiscard]] const ServiceConfig& config() const { return options_.config; }
  [[nodiscard]] const Catalog& catalog() const { return options_.catalog; }
  [[nodiscard]] const Registry& registry() const { return registry_; }
  [[nodiscard]] const StateLog& state_log() const { return state_log_; }
  [[nodiscard]] const GeoIndex& geo_index() const { return geo_; }
  [[nodiscard]] const TtlCache& topic_cache() const { return cache_; }
  [[nodiscard]] const Broker& broker() const { return broker_; }
  [[nodiscard]] ActionRouter& router() { return router_; }
  [[nodiscard]] PropertyEngine& properties() { return engine_; }

 private:
  struct OwnedTrip {
    UserId user;
    Trip trip;
    VehicleProfile vehicle;
  };

  Expected<UserId> authenticate(std::string_view authorization) const;
  Expected<OwnedTrip> owned_trip(std::string_view authorization, const TripId& trip) const;
  Expected<OwnedTrip> owned_active_trip(std::string_view authorization, const TripId& trip) const;
  Expected<VehicleProfile> active_trip_vehicle(const TripId& trip) const;
  ApiResponse dispatch(const ApiRequest& request);
  void sweeper_loop();

  const Clock& clock_;
  Options options_;
  Registry registry_;
  StateLog state_log_;
  GeoIndex geo_;
  TtlCache cache_;
  Broker broker_;
  PropertyEngine engine_;
  ActionRouter router_;

  std::mutex sweeper_mutex_;
  std::condition_variable sweeper_cv_;
  bool stopping_ = false;
  std::thread sweeper_;
};

// Extracts the token from "Bearer <token>"; empty when malformed.
std::string bearer_token(std::string_view authorization);

nlohmann::json error_body(const Error& error);

}  // namespace rucs
