#include "rucs/state_log.hpp"

#include <string>

#include "rucs/codec.hpp"
#include "rucs/validation.hpp"

namespace rucs {

namespace {

std::size_t slot(StateKind kind) { return static_cast<std::size_t>(kind); }

}  // namespace

StateLog::StateLog(std::optional<std::filesystem::path> data_dir) : data_dir_(std::move(data_dir)) {}

StateLog::~StateLog() = default;

void StateLog::open_trip(const TripId& trip) {
  auto log = std::make_shared<TripLog>();
  if (data_dir_) {
    const auto dir = *data_dir_ / "trips" / trip.value;
    std::filesystem::create_directories(dir);
    log->file = std::make_unique<std::ofstream>(dir / "states.jsonl", std::ios::app);
  }
  std::unique_lock lock(mutex_);
  trips_.try_emplace(trip, std::move(log));
}

void StateLog::close_trip(const TripId& trip) {
  if (auto log = find(trip)) {
    std::lock_guard lock(log->mutex);
    log->status = TripStatus::completed;
    if (log->file) log->file->flush();
  }
}

std::shared_ptr<StateLog::TripLog> StateLog::find(const TripId& trip) const {
  std::shared_lock lock(mutex_);
  const auto it = trips_.find(trip);
  return it == trips_.end() ? nullptr : it->second;
}

Status StateLog::append_locked(TripLog& log, const StateRecord& record) {
  std::optional<std::int64_t> last;
  if (!log.records.empty()) last = log.records.back().seq;
  if (auto s = validate_state_record(record, TripContext{log.status, last}); !s) return s;

  if (log.file) {
    *log.file << json(record).dump() << '\n';
    log.file->flush();
    if (!*log.file) return make_error(ErrorCode::internal, "failed to write state log");
  }
  const std::size_t index = log.records.size();
  log.records.push_back(record);
  log.latest[slot(StateKind::location)] = index;
  if (record.control) log.latest[slot(StateKind::control)] = index;
  if (record.engine) log.latest[slot(StateKind::engine)] = index;
  if (record.driver) log.latest[slot(StateKind::driver)] = index;
  return ok();
}

Status StateLog::append_state(const StateRecord& record) {
  auto log = find(record.trip);
  if (!log) return make_error(ErrorCode::trip_not_active, "unknown trip " + record.trip.value);
  {
    std::lock_guard lock(log->mutex);
    if (auto s = append_locked(*log, record); !s) return s;
  }
  if (listener_) listener_(record);
  return ok();
}

Expected<std::int64_t> StateLog::append_next(StateRecord record) {
  auto log = find(record.trip);
  if (!log) return make_error(ErrorCode::trip_not_active, "unknown trip " + record.trip.value);
  {
    std::lock_guard lock(log->mutex);
    record.seq = log->records.empty() ? 1 : log->records.back().seq + 1;
    if (auto s = append_locked(*log, record); !s) return s.error();
  }
  if (listener_) listener_(record);
  return record.seq;
}

Expected<LatestComponent> StateLog::latest_state(const TripId& trip, StateKind kind) const {
  auto log = find(trip);
  if (!log) return make_error(ErrorCode::no_data, "no states for trip " + trip.value);
  std::lock_guard lock(log->mutex);
  const auto& index = log->latest[slot(kind)];
  if (!index) {
    return make_error(ErrorCode::no_data,
                      "trip " + trip.value + " has no " + std::string(to_string(kind)) + " state");
  }
  const StateRecord& r = log->records[*index];
  LatestComponent out{r.seq, r.recorded_at, LocationState{}};
  switch (kind) {
    case StateKind::location: out.value = *r.location; break;
    case StateKind::control: out.value = *r.control; break;
    case StateKind::engine: out.value = *r.engine; break;
    case StateKind::driver: out.value = *r.driver; break;
  }
  return out;
}

std::optional<std::int64_t> StateLog::last_seq(const TripId& trip) const {
  auto log = find(trip);
  if (!log) return std::nullopt;
  std::lock_guard lock(log->mutex);
  if (log->records.empty()) return std::nullopt;
  return log->records.back().seq;
}

std::size_t StateLog::log_length(const TripId& trip) const {
  auto log = find(trip);
  if (!log) return 0;
  std::lock_guard lock(log->mutex);
  return log->records.size();
}

std::vector<StateRecord> StateLog::records(const TripId& trip) const {
  auto log = find(trip);
  if (!log) return {};
  std::lock_guard lock(log->mutex);
  return log->records;
}

std::optional<TripStatus> StateLog::status(const TripId& trip) const {
  auto log = find(trip);
  if (!log) return std::nullopt;
  std::lock_guard lock(log->mutex);
  return log->status;
}

std::optional<std::filesystem::path> StateLog::log_path(const TripId& trip) const {
  if (!data_dir_) return std::nullopt;
  return *data_dir_ / "trips" / trip.value / "states.jsonl";
}

Expected<std::vector<StateRecord>> read_state_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::not_found, "cannot open " + path.string());
  std::vector<StateRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line).get<StateRecord>());
    } catch (const std::exception& e) {
      return make_error(ErrorCode::bad_request,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rucs
