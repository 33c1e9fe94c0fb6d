#include "rucs/property_engine.hpp"

#include "rucs/codec.hpp"

namespace rucs {

void to_json(nlohmann::json& j, const PropertyResult& v) {
  j = nlohmann::json{{"property", v.property},
                     {"value", v.value},
                     {"computed_at", v.computed_at},
                     {"source_seq", v.source_seq}};
}

void from_json(const nlohmann::json& j, PropertyResult& v) {
  j.at("property").get_to(v.property);
  v.value = j.at("value");
  j.at("computed_at").get_to(v.computed_at);
  j.at("source_seq").get_to(v.source_seq);
}

Expected<HandlerOutput> DrowsinessHandler::run(const PropertyRequest& request,
                                               const StateView& states) const {
  auto latest = states.latest_state(request.target_trip, StateKind::driver);
  if (!latest) return latest.error();
  const auto& driver = latest->as<DriverState>();
  nlohmann::json value{{"level", to_string(driver.drowsiness)},
                       {"binary", is_drowsy(driver.drowsiness) ? "drowsy" : "non-drowsy"},
                       {"measured_at", format_rfc3339(driver.measured_at)}};
  return HandlerOutput{std::move(value), latest->seq};
}

Expected<HandlerOutput> AutomationLevelHandler::run(const PropertyRequest& request,
                                                    const StateView& states) const {
  auto latest = states.latest_state(request.target_trip, StateKind::control);
  if (!latest) return latest.error();
  const auto& control = latest->as<ControlState>();
  nlohmann::json value{{"level", to_string(control.automation_level)}};
  if (control.lane_change_intent) value["lane_change_intent"] = to_string(*control.lane_change_intent);
  return HandlerOutput{std::move(value), latest->seq};
}

HandlerChain HandlerChain::with_defaults() {
  HandlerChain chain;
  chain.add(std::make_shared<DrowsinessHandler>());
  chain.add(std::make_shared<AutomationLevelHandler>());
  return chain;
}

void HandlerChain::add(std::shared_ptr<const PropertyHandler> handler) {
  handlers_.push_back(std::move(handler));
}

Expected<std::shared_ptr<const PropertyHandler>> HandlerChain::get_handler(const PropertyName& property) const {
  for (const auto& h : handlers_) {
    if (h->accepts(property)) return h;
  }
  return make_error(ErrorCode::no_handler, "no handler for property '" + property + "'");
}

PropertyEngine::PropertyEngine(const Catalog& catalog, const StateView& states, const Clock& clock,
                               HandlerChain chain, std::size_t workers)
    : catalog_(catalog), states_(states), clock_(clock), chain_(std::move(chain)) {
  workers_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

PropertyEngine::~PropertyEngine() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  work_ready_.notify_all();
  for (auto& t : workers_) t.join();
}

Status PropertyEngine::check_request(const PropertyRequest& request, const std::set<PropertyName>& exposed,
                                     CatalogEntry* entry_out) const {
  if (auto h = chain_.get_handler(request.property); !h) return h.error();
  auto entry = catalog_.lookup(request.property);
  if (!entry || entry->kind != CatalogKind::property) {
    return make_error(ErrorCode::no_handler, "'" + request.property + "' is not a catalog property");
  }
  if (entry->requires_exposure && !exposed.contains(request.property)) {
    return make_error(ErrorCode::permission_denied, "target does not expose '" + request.property + "'");
  }
  if (entry_out) *entry_out = std::move(*entry);
  return ok();
}

Expected<PropertyResult> PropertyEngine::compute(const PropertyRequest& request, const CatalogEntry& entry) const {
  auto handler = chain_.get_handler(request.property);
  if (!handler) return handler.error();
  auto output = (*handler)->run(request, states_);
  if (!output) return output.error();
  if (auto errors = entry.schema.validate(output->value); !errors.empty()) {
    std::string message = "handler '" + (*handler)->name() + "' produced an invalid value:";
    for (const auto& e : errors) message += " " + e + ";";
    return make_error(ErrorCode::schema_invalid, std::move(message));
  }
  return PropertyResult{request.property, std::move(output->value), clock_.now(), output->source_seq};
}

Expected<PropertyResult> PropertyEngine::handle_property(const PropertyRequest& request,
                                                         const std::set<PropertyName>& exposed) const {
  CatalogEntry entry;
  if (auto s = check_request(request, exposed, &entry); !s) return s.error();
  return compute(request, entry);
}

Expected<std::string> PropertyEngine::submit_deferred(const PropertyRequest& request,
                                                      const std::set<PropertyName>& exposed) {
  CatalogEntry entry;
  if (auto s = check_request(request, exposed, &entry); !s) return s.error();

  const auto seq = states_.last_seq(request.target_trip);
  const std::string cache_key = request.target_trip.value + '\x1f' + request.property + '\x1f' +
                                request.params.dump() + '\x1f' + (seq ? std::to_string(*seq) : "-");
  std::string task_id = ids_.next("k");

  std::lock_guard lock(mutex_);
  if (const auto hit = result_cache_.find(cache_key); hit != result_cache_.end()) {
    tasks_[task_id].poll = DeferredPoll{DeferredPoll::State::done, hit->second, std::nullopt};
    return task_id;
  }
  tasks_[task_id];
  queue_.emplace_back([this, request, entry = std::move(entry), cache_key, task_id] {
    ++executor_runs_;
    auto result = compute(request, entry);
    {
      std::lock_guard inner(mutex_);
      auto& poll = tasks_[task_id].poll;
      if (result) {
        poll = DeferredPoll{DeferredPoll::State::done, *result, std::nullopt};
        result_cache_.emplace(cache_key, *result);
      } else {
        poll = DeferredPoll{DeferredPoll::State::failed, std::nullopt, result.error()};
      }
    }
    task_done_.notify_all();
  });
  work_ready_.notify_one();
  return task_id;
}

Expected<DeferredPoll> PropertyEngine::poll_deferred(const std::string& task_id) const {
  std::lock_guard lock(mutex_);
  const auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return make_error(ErrorCode::unknown_task, "unknown task '" + task_id + "'");
  return it->second.poll;
}

Expected<DeferredPoll> PropertyEngine::wait_deferred(const std::string& task_id,
                                                     std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  const auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return make_error(ErrorCode::unknown_task, "unknown task '" + task_id + "'");
  const Task& task = it->second;
  task_done_.wait_for(lock, timeout, [&] { return task.poll.state != DeferredPoll::State::pending; });
  return task.poll;
}

Expected<PropertyResult> PropertyEngine::request(const PropertyRequest& request,
                                                 const std::set<PropertyName>& exposed,
                                                 std::chrono::milliseconds timeout) {
  auto entry = catalog_.lookup(request.property);
  if (!entry || !entry->deferred) return handle_property(request, exposed);
  auto task = submit_deferred(request, exposed);
  if (!task) return task.error();
  auto poll = wait_deferred(*task, timeout);
  if (!poll) return poll.error();
  switch (poll->state) {
    case DeferredPoll::State::done: return *poll->result;
    case DeferredPoll::State::failed: return *poll->error;
    case DeferredPoll::State::pending: break;
  }
  return make_error(ErrorCode::internal, "deferred property '" + request.property + "' timed out");
}

void PropertyEngine::worker_loop() {
  for (;;) {
    std::function<void()> job;
    {
      std::unique_lock lock(mutex_);
      work_ready_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_ && queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    job();
  }
}

}  // namespace rucs
