#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rucs/envelope.hpp"
#include "rucs/result.hpp"

namespace rucs {

inline constexpr std::size_t kDefaultSubscriberQueue = 1024;

namespace detail {
struct BrokerState;
struct SubscriberQueue;
}  // namespace detail

// Ordered stream of envelopes for one subscriber. Unsubscribes on
// destruction. One consumer at a time.
class Subscription {
 public:
  Subscription() = default;
  ~Subscription();
  Subscription(Subscription&&) noexcept;
  Subscription& operator=(Subscription&&) noexcept;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;

  // Blocks up to `timeout`; nullopt on timeout or once closed and drained.
  std::optional<Envelope> next(std::chrono::milliseconds timeout);
  std::optional<Envelope> try_next();
  std::vector<Envelope> drain();

  [[nodiscard]] bool closed() const;
  [[nodiscard]] std::uint64_t overflow_count() const;
  [[nodiscard]] const TopicName& topic() const { return topic_; }
  [[nodiscard]] bool valid() const { return queue_ != nullptr; }

  void unsubscribe();

 private:
  friend class Broker;
  Subscription(TopicName topic, std::shared_ptr<detail::SubscriberQueue> queue,
               std::weak_ptr<detail::BrokerState> broker);

  TopicName topic_;
  std::shared_ptr<detail::SubscriberQueue> queue_;
  std::weak_ptr<detail::BrokerState> broker_;
};

// In-process topic broker: at-most-once, no retention, bounded
// per-subscriber queues that drop the oldest envelope on overflow.
class Broker {
 public:
  struct Stats {
    std::uint64_t published = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped_no_subscriber = 0;
    std::uint64_t overflow = 0;
  };

  explicit Broker(std::size_t queue_capacity = kDefaultSubscriberQueue);
  ~Broker();

  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  // Idempotent.
  Status declare_topic(const TopicName& name);
  // Closes the topic's subscriptions.
  void remove_topic(const TopicName& name);
  [[nodiscard]] bool has_topic(const TopicName& name) const;
  [[nodiscard]] std::size_t topic_count() const;
  [[nodiscard]] std::size_t subscriber_count(const TopicName& name) const;

  Status publish(const Envelope& envelope);
  Expected<Subscription> subscribe(const TopicName& topic);

  [[nodiscard]] Stats stats() const;

 private:
  std::shared_ptr<detail::BrokerState> state_;
};

}  // namespace rucs
