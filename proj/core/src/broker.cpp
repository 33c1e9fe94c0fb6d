#include "rucs/broker.hpp"

#include <algorithm>

namespace rucs {

namespace detail {

struct SubscriberQueue {
  explicit SubscriberQueue(std::size_t cap) : capacity(cap) {}

  const std::size_t capacity;
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<Envelope> items;
  bool closed = false;
  std::uint64_t overflow = 0;

  // Returns true when an older envelope had to be dropped.
  bool push(const Envelope& e) {
    bool dropped = false;
    {
      std::lock_guard lock(mutex);
      if (closed) return false;
      if (items.size() >= capacity) {
        items.pop_front();
        ++overflow;
        dropped = true;
      }
      items.push_back(e);
    }
    ready.notify_one();
    return dropped;
  }

  void close() {
    {
      std::lock_guard lock(mutex);
      closed = true;
    }
    ready.notify_all();
  }
};

struct BrokerState {
  std::size_t capacity = kDefaultSubscriberQueue;
  mutable std::mutex mutex;
  std::unordered_map<TopicName, std::vector<std::shared_ptr<SubscriberQueue>>> topics;
  std::atomic<std::uint64_t> published{0};
  std::atomic<std::uint64_t> delivered{0};
  std::atomic<std::uint64_t> dropped{0};
  std::atomic<std::uint64_t> overflow{0};

  void detach(const TopicName& topic, const SubscriberQueue* queue) {
    std::lock_guard lock(mutex);
    const auto it = topics.find(topic);
    if (it == topics.end()) return;
    auto& subs = it->second;
    subs.erase(std::remove_if(subs.begin(), subs.end(), [&](const auto& q) { return q.get() == queue; }),
               subs.end());
  }
};

}  // namespace detail

Subscription::Subscription(TopicName topic, std::shared_ptr<detail::SubscriberQueue> queue,
                           std::weak_ptr<detail::BrokerState> broker)
    : topic_(std::move(topic)), queue_(std::move(queue)), broker_(std::move(broker)) {}

Subscription::~Subscription() { unsubscribe(); }

Subscription::Subscription(Subscription&& other) noexcept
    : topic_(std::move(other.topic_)),
      queue_(std::move(other.queue_)),
      broker_(std::move(other.broker_)) {}

Subscription& Subscription::operator=(Subscription&& other) noexcept {
  if (this != &other) {
    unsubscribe();
    topic_ = std::move(other.topic_);
    queue_ = std::move(other.queue_);
    broker_ = std::move(other.broker_);
  }
  return *this;
}

void Subscription::unsubscribe() {
  if (!queue_) return;
  if (auto broker = broker_.lock()) broker->detach(topic_, queue_.get());
  queue_->close();
  queue_.reset();
}

std::optional<Envelope> Subscription::next(std::chrono::milliseconds timeout) {
  if (!queue_) return std::nullopt;
  std::unique_lock lock(queue_->mutex);
  queue_->ready.wait_for(lock, timeout, [&] { return !queue_->items.empty() || queue_->closed; });
  if (queue_->items.empty()) return std::nullopt;
  Envelope e = std::move(queue_->items.front());
  queue_->items.pop_front();
  return e;
}

std::optional<Envelope> Subscription::try_next() { return next(std::chrono::milliseconds{0}); }

std::vector<Envelope> Subscription::drain() {
  std::vector<Envelope> out;
  if (!queue_) return out;
  std::lock_guard lock(queue_->mutex);
  out.assign(std::make_move_iterator(queue_->items.begin()), std::make_move_iterator(queue_->items.end()));
  queue_->items.clear();
  return out;
}

bool Subscription::closed() const {
  if (!queue_) return true;
  std::lock_guard lock(queue_->mutex);
  return queue_->closed;
}

std::uint64_t Subscription::overflow_count() const {
  if (!queue_) return 0;
  std::lock_guard lock(queue_->mutex);
  return queue_->overflow;
}

Broker::Broker(std::size_t queue_capacity) : state_(std::make_shared<detail::BrokerState>()) {
  state_->capacity = std::max<std::size_t>(1, queue_capacity);
}

Broker::~Broker() {
  std::lock_guard lock(state_->mutex);
  for (auto& [name, subs] : state_->topics) {
    for (auto& q : subs) q->close();
  }
}

Status Broker::declare_topic(const TopicName& name) {
  if (!is_valid_topic(name)) {
    return make_error(ErrorCode::pattern_violation, "topic '" + name + "' does not match trip.<id>.in|out");
  }
  std::lock_guard lock(state_->mutex);
  state_->topics.try_emplace(name);
  return ok();
}

void Broker::remove_topic(const TopicName& name) {
  std::vector<std::shared_ptr<detail::SubscriberQueue>> subs;
  {
    std::lock_guard lock(state_->mutex);
    const auto it = state_->topics.find(name);
    if (it == state_->topics.end()) return;
    subs = std::move(it->second);
    state_->topics.erase(it);
  }
  for (auto& q : subs) q->close();
}

bool Broker::has_topic(const TopicName& name) const {
  std::lock_guard lock(state_->mutex);
  return state_->topics.contains(name);
}

std::size_t Broker::topic_count() const {
  std::lock_guard lock(state_->mutex);
  return state_->topics.size();
}

std::size_t Broker::subscriber_count(const TopicName& name) const {
  std::lock_guard lock(state_->mutex);
  const auto it = state_->topics.find(name);
  return it == state_->topics.end() ? 0 : it->second.size();
}

Status Broker::publish(const Envelope& envelope) {
  std::lock_guard lock(state_->mutex);
  const auto it = state_->topics.find(envelope.topic);
  if (it == state_->topics.end()) {
    return make_error(ErrorCode::no_such_topic, "no such topic '" + envelope.topic + "'");
  }
  ++state_->published;
  if (it->second.empty()) {
    ++state_->dropped;
    return ok();
  }
  for (const auto& q : it->second) {
    if (q->push(envelope)) ++state_->overflow;
    ++state_->delivered;
  }
  return ok();
}

Expected<Subscription> Broker::subscribe(const TopicName& topic) {
  std::lock_guard lock(state_->mutex);
  const auto it = state_->topics.find(topic);
  if (it == state_->topics.end()) {
    return make_error(ErrorCode::no_such_topic, "no such topic '" + topic + "'");
  }
  auto queue = std::make_shared<detail::SubscriberQueue>(state_->capacity);
  it->second.push_back(queue);
  return Subscription{topic, std::move(queue), state_};
}

Broker::Stats Broker::stats() const {
  return Stats{state_->published.load(), state_->delivered.load(), state_->dropped.load(),
               state_->overflow.load()};
}

}  // namespace rucs
