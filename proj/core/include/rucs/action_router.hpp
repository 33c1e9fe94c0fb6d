#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rucs/broker.hpp"
#include "rucs/catalog.hpp"
#include "rucs/clock.hpp"
#include "rucs/ids.hpp"
#include "rucs/registry.hpp"
#include "rucs/ttl_cache.hpp"

namespace rucs {

inline constexpr double kMaxActionTimeoutSeconds = 30.0;

struct ActionRequest {
  TripId requester_trip;
  TripId target_trip;
  ActionName action;
  nlohmann::json payload = nlohmann::json::object();
  std::optional<double> timeout_s;
};

struct PendingExchange {
  std::string correlation_id;
  TopicName requester_reply_topic;
  Timestamp deadline;
  TripId target_trip;
  ActionName action;
};

// Forwards actions to the target trip's listen topic and relays the
// target's answer to the requester. Every dispatch ends in exactly one of:
// the response is forwarded, or a timeout notice is sent.
class ActionRouter {
 public:
  struct Options {
    double topic_cache_ttl_s = 300.0;
    double default_timeout_s = 5.0;
    std::size_t expired_memory = 4096;
  };

  struct Counters {
    std::uint64_t dispatched = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t timeout_notices = 0;
    std::uint64_t expired = 0;
  };

  ActionRouter(const Catalog& catalog, const Registry& registry, TtlCache& cache, Broker& broker,
               const Clock& clock, Options options);
  ActionRouter(const Catalog& catalog, const Registry& registry, TtlCache& cache, Broker& broker,
               const Clock& clock)
      : ActionRouter(catalog, registry, cache, broker, clock, Options{}) {}

  // Cache first; on a miss reads the trip record and repopulates the cache.
  Expected<TopicName> resolve_topic(const TripId& target);

  // `exposed` is the target vehicle's exposed action set. Returns the
  // correlation id once the request has been published.
  Expected<std::string> dispatch_action(const ActionRequest& request, const std::set<ActionName>& exposed);

  // `responder`, when given, must be the trip the request was sent to.
  Status complete_action(const Envelope& response, const std::optional<TripId>& responder = std::nullopt);

  // Sends timeout notices for exchanges past their deadline.
  std::size_t expire_due();

  // Drops the cached topic of a trip that stopped being reachable.
  void forget_topic(const TripId& trip);

  [[nodiscard]] Counters counters() const;
  [[nodiscard]] std::size_t pending_count() const;
  [[nodiscard]] static std::string cache_key(const TripId& trip) { return "topic:" + trip.value; }

 private:
  void send_timeout_notice(const PendingExchange& exchange);
  void remember_expired(const std::string& correlation_id);

  const Catalog& catalog_;
  const Registry& registry_;
  TtlCache& cache_;
  Broker& broker_;
  const Clock& clock_;
  Options options_;
  IdGenerator ids_;

  mutable std::mutex mutex_;
  std::unordered_map<std::string, PendingExchange> pending_;
  std::deque<std::string> expired_order_;
  std::unordered_set<std::string> expired_;

  std::atomic<std::uint64_t> dispatched_{0};
  std::atomic<std::uint64_t> forwarded_{0};
  std::atomic<std::uint64_t> timeout_notices_{0};
  std::atomic<std::uint64_t> expired_count_{0};
};

}  // namespace rucs
