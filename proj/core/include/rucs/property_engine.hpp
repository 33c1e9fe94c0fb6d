#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "rucs/catalog.hpp"
#include "rucs/clock.hpp"
#include "rucs/domain.hpp"
#include "rucs/ids.hpp"
#include "rucs/result.hpp"
#include "rucs/state_log.hpp"

namespace rucs {

struct PropertyRequest {
  TripId requester_trip;
  TripId target_trip;
  PropertyName property;
  nlohmann::json params = nlohmann::json::object();
};

struct PropertyResult {
  PropertyName property;
  nlohmann::json value;
  Timestamp computed_at;
  // seq of the newest state record the handler consulted
  std::int64_t source_seq = 0;

  friend bool operator==(const PropertyResult&, const PropertyResult&) = default;
};

void to_json(nlohmann::json& j, const PropertyResult& v);
void from_json(const nlohmann::json& j, PropertyResult& v);

struct HandlerOutput {
  nlohmann::json value;
  std::int64_t source_seq = 0;
};

// A link in the property chain. Implementations must be stateless or
// internally synchronized: run() is called concurrently.
class PropertyHandler {
 public:
  virtual ~PropertyHandler() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual bool accepts(const PropertyName& property) const = 0;
  [[nodiscard]] virtual Expected<HandlerOutput> run(const PropertyRequest& request,
                                                    const StateView& states) const = 0;
};

// Level and binary reading of the target's newest driver state.
class DrowsinessHandler final : public PropertyHandler {
 public:
  [[nodiscard]] std::string name() const override { return "drowsiness"; }
  [[nodiscard]] bool accepts(const PropertyName& p) const override { return p == "drowsiness"; }
  [[nodiscard]] Expected<HandlerOutput> run(const PropertyRequest& request,
                                            const StateView& states) const override;
};

class AutomationLevelHandler final : public PropertyHandler {
 public:
  [[nodiscard]] std::string name() const override { return "automation_level"; }
  [[nodiscard]] bool accepts(const PropertyName& p) const override { return p == "automation_level"; }
  [[nodiscard]] Expected<HandlerOutput> run(const PropertyRequest& request,
                                            const StateView& states) const override;
};

// Chain of responsibility: the first registered handler that accepts a
// property handles it.
class HandlerChain {
 public:
  // drowsiness, then automation_level.
  static HandlerChain with_defaults();

  void add(std::shared_ptr<const PropertyHandler> handler);
  [[nodiscard]] Expected<std::shared_ptr<const PropertyHandler>> get_handler(const PropertyName& property) const;
  [[nodiscard]] std::size_t size() const { return handlers_.size(); }

 private:
  std::vector<std::shared_ptr<const PropertyHandler>> handlers_;
};

struct DeferredPoll {
  enum class State { pending, done, failed };
  State state = State::pending;
  std::optional<PropertyResult> result;
  std::optional<Error> error;
};

// Runs property handlers and validates their output against the catalog
// schema. Deferred requests go to a fixed worker pool with a FIFO queue;
// their results are cached by (target trip, property, params, target's
// last seq at submission).
class PropertyEngine {
 public:
  PropertyEngine(const Catalog& catalog, const StateView& states, const Clock& clock,
                 HandlerChain chain = HandlerChain::with_defaults(), std::size_t workers = 2);
  ~PropertyEngine();

  PropertyEngine(const PropertyEngine&) = delete;
  PropertyEngine& operator=(const PropertyEngine&) = delete;

  [[nodiscard]] Expected<std::shared_ptr<const PropertyHandler>> get_handler(const PropertyName& p) const {
    return chain_.get_handler(p);
  }

  // Synchronous path. `exposed` is the target vehicle's exposed property set.
  [[nodiscard]] Expected<PropertyResult> handle_property(const PropertyRequest& request,
                                                         const std::set<PropertyName>& exposed) const;

  Expected<std::string> submit_deferred(const PropertyRequest& request, const std::set<PropertyName>& exposed);
  [[nodiscard]] Expected<DeferredPoll> poll_deferred(const std::string& task_id) const;
  // Blocks until the task resolves or `timeout` passes (then returns pending).
  [[nodiscard]] Expected<DeferredPoll> wait_deferred(const std::string& task_id,
                                                     std::chrono::milliseconds timeout) const;

  // Synchronous or deferred according to the catalog entry; deferred
  // requests are awaited up to `timeout`.
  [[nodiscard]] Expected<PropertyResult> request(const PropertyRequest& request,
                                                 const std::set<PropertyName>& exposed,
                                                 std::chrono::milliseconds timeout);

  [[nodiscard]] std::uint64_t executor_invocations() const { return executor_runs_.load(); }
  [[nodiscard]] std::size_t worker_count() const { return workers_.size(); }

 private:
  struct Task {
    DeferredPoll poll;
  };

  Status check_request(const PropertyRequest& request, const std::set<PropertyName>& exposed,
                       CatalogEntry* entry_out) const;
  Expected<PropertyResult> compute(const PropertyRequest& request, const CatalogEntry& entry) const;
  void worker_loop();

  const Catalog& catalog_;
  const StateView& states_;
  const Clock& clock_;
  HandlerChain chain_;
  IdGenerator ids_;

  mutable std::mutex mutex_;
  mutable std::condition_variable task_done_;
  std::condition_variable work_ready_;
  std::deque<std::function<void()>> queue_;
  // TODO: evict resolved tasks after a retention window; the table grows
  // with every deferred request.
  std::unordered_map<std::string, Task> tasks_;
  std::map<std::string, PropertyResult> result_cache_;
  bool stopping_ = false;
  std::atomic<std::uint64_t> executor_runs_{0};
  std::vector<std::thread> workers_;
};

}  // namespace rucs
