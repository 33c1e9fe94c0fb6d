#include "rucs/action_router.hpp"

#include <cmath>
#include <vector>

namespace rucs {

ActionRouter::ActionRouter(const Catalog& catalog, const Registry& registry, TtlCache& cache, Broker& broker,
                           const Clock& clock, Options options)
    : catalog_(catalog),
      registry_(registry),
      cache_(cache),
      broker_(broker),
      clock_(clock),
      options_(options) {}

Expected<TopicName> ActionRouter::resolve_topic(const TripId& target) {
  const std::string key = cache_key(target);
  if (auto cached = cache_.get(key)) return *cached;
  auto topic = registry_.get_topic(target);
  if (!topic) return make_error(ErrorCode::no_topic, "no active trip " + target.value);
  cache_.put(key, *topic, options_.topic_cache_ttl_s);
  return *topic;
}

Expected<std::string> ActionRouter::dispatch_action(const ActionRequest& request,
                                                    const std::set<ActionName>& exposed) {
  auto topic = resolve_topic(request.target_trip);
  if (!topic) return topic.error();

  const double timeout = request.timeout_s.value_or(options_.default_timeout_s);
  if (!std::isfinite(timeout) || timeout <= 0.0 || timeout > kMaxActionTimeoutSeconds) {
    return make_error(ErrorCode::invalid_timeout, "timeout must be in (0, 30] seconds");
  }
  if (!catalog_.has_action(request.action) || !exposed.contains(request.action)) {
    return make_error(ErrorCode::permission_denied, "target does not expose action '" + request.action + "'");
  }
  const auto entry = catalog_.lookup(request.action);
  if (auto errors = entry->schema.validate(request.payload); !errors.empty()) {
    return make_error(ErrorCode::bad_request, "invalid payload for '" + request.action + "': " + errors.front());
  }

  const Timestamp now = clock_.now();
  Envelope envelope{*topic,
                    ids_.next("c"),
                    EnvelopeKind::action_request,
                    request.action,
                    request.payload,
                    listen_topic_for(request.requester_trip),
                    now};
  PendingExchange exchange{envelope.correlation_id, *envelope.reply_to, now.plus_seconds(timeout),
                           request.target_trip, request.action};
  {
    std::lock_guard lock(mutex_);
    pending_.emplace(exchange.correlation_id, exchange);
  }
  if (auto s = broker_.publish(envelope); !s) {
    // the cached topic outlived the trip's broker topics
    {
      std::lock_guard lock(mutex_);
      pending_.erase(exchange.correlation_id);
    }
    forget_topic(request.target_trip);
    return make_error(ErrorCode::no_topic, "target topic is gone");
  }
  ++dispatched_;
  return envelope.correlation_id;
}

Status ActionRouter::complete_action(const Envelope& response, const std::optional<TripId>& responder) {
  if (response.kind != EnvelopeKind::action_response) {
    return make_error(ErrorCode::bad_request, "expected an action_response envelope");
  }
  const Timestamp now = clock_.now();
  PendingExchange exchange;
  {
    std::lock_guard lock(mutex_);
    const auto it = pending_.find(response.correlation_id);
    if (it == pending_.end() || (responder && it->second.target_trip != *responder)) {
      if (expired_.contains(response.correlation_id)) {
        ++expired_count_;
        return make_error(ErrorCode::expired, "exchange already timed out");
      }
      return make_error(ErrorCode::unknown_correlation, "unknown correlation id");
    }
    if (now > it->second.deadline) {
      exchange = std::move(it->second);
      pending_.erase(it);
      remember_expired(exchange.correlation_id);
      ++expired_count_;
    } else {
      const auto entry = catalog_.lookup(it->second.action);
      if (entry) {
        if (auto errors = entry->response_schema.validate(response.payload); !errors.empty()) {
          return make_error(ErrorCode::bad_request, "invalid response payload: " + errors.front());
        }
      }
      exchange = std::move(it->second);
      pending_.erase(it);
      Envelope forward{exchange.requester_reply_topic, exchange.correlation_id, EnvelopeKind::action_response,
                       exchange.action, response.payload, std::nullopt, now};
      // A requester whose trip ended has no topic left; the answer is dropped.
      (void)broker_.publish(forward);
      ++forwarded_;
      return ok();
    }
  }
  send_timeout_notice(exchange);
  return make_error(ErrorCode::expired, "exchange timed out");
}

std::size_t ActionRouter::expire_due() {
  const Timestamp now = clock_.now();
  std::vector<PendingExchange> due;
  {
    std::lock_guard lock(mutex_);
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (now > it->second.deadline) {
        remember_expired(it->first);
        due.push_back(std::move(it->second));
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (const auto& exchange : due) send_timeout_notice(exchange);
  return due.size();
}

void ActionRouter::send_timeout_notice(const PendingExchange& exchange) {
  Envelope notice{exchange.requester_reply_topic,
                  exchange.correlation_id,
                  EnvelopeKind::action_response,
                  exchange.action,
                  nlohmann::json{{"error", "timeout"}},
                  std::nullopt,
                  clock_.now()};
  (void)broker_.publish(notice);
  ++timeout_notices_;
}

void ActionRouter::remember_expired(const std::string& correlation_id) {
  expired_.insert(correlation_id);
  expired_order_.push_back(correlation_id);
  while (expired_order_.size() > options_.expired_memory) {
    expired_.erase(expired_order_.front());
    expired_order_.pop_front();
  }
}

void ActionRouter::forget_topic(const TripId& trip) { cache_.erase(cache_key(trip)); }

ActionRouter::Counters ActionRouter::counters() const {
  return Counters{dispatched_.load(), forwarded_.load(), timeout_notices_.load(), expired_count_.load()};
}

std::size_t ActionRouter::pending_count() const {
  std::lock_guard lock(mutex_);
  return pending_.size();
}

}  // namespace rucs
