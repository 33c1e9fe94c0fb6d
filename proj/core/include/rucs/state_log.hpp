#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rucs/domain.hpp"
#include "rucs/result.hpp"

namespace rucs {

// A state component together with the record it came from.
struct LatestComponent {
  std::int64_t seq = 0;
  Timestamp recorded_at;
  std::variant<LocationState, ControlState, EngineState, DriverState> value;

  template <typename T>
  [[nodiscard]] const T& as() const {
    return std::get<T>(value);
  }
};

// Read side used by property handlers.
class StateView {
 public:
  virtual ~StateView() = default;
  [[nodiscard]] virtual Expected<LatestComponent> latest_state(const TripId& trip, StateKind kind) const = 0;
  [[nodiscard]] virtual std::optional<std::int64_t> last_seq(const TripId& trip) const = 0;
};

// Append-only per-trip log of state records. With a data directory every
// accepted record is also written to <root>/trips/<trip_id>/states.jsonl.
// Appends to one trip are serialized; distinct trips append concurrently.
class StateLog final : public StateView {
 public:
  using AppendListener = std::function<void(const StateRecord&)>;

  explicit StateLog(std::optional<std::filesystem::path> data_dir = std::nullopt);
  ~StateLog() override;

  StateLog(const StateLog&) = delete;
  StateLog& operator=(const StateLog&) = delete;

  // Called after each successful append, outside the trip lock.
  void set_append_listener(AppendListener listener) { listener_ = std::move(listener); }

  void open_trip(const TripId& trip);
  // Completed trips keep their log but reject further appends.
  void close_trip(const TripId& trip);

  Status append_state(const StateRecord& record);
  // Assigns seq = last seq + 1 (1 for an empty log) under the trip lock.
  Expected<std::int64_t> append_next(StateRecord record);

  [[nodiscard]] Expected<LatestComponent> latest_state(const TripId& trip, StateKind kind) const override;
  [[nodiscard]] std::optional<std::int64_t> last_seq(const TripId& trip) const override;
  [[nodiscard]] std::size_t log_length(const TripId& trip) const;
  [[nodiscard]] std::vector<StateRecord> records(const TripId& trip) const;
  [[nodiscard]] std::optional<TripStatus> status(const TripId& trip) const;

  [[nodiscard]] std::optional<std::filesystem::path> log_path(const TripId& trip) const;

 private:
  struct TripLog {
    mutable std::mutex mutex;
    TripStatus status = TripStatus::active;
    std::vector<StateRecord> records;
    // Index into records of the newest record carrying each component.
    std::optional<std::size_t> latest[4];
    std::unique_ptr<std::ofstream> file;
  };

  [[nodiscard]] std::shared_ptr<TripLog> find(const TripId& trip) const;
  Status append_locked(TripLog& log, const StateRecord& record);

  std::optional<std::filesystem::path> data_dir_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<TripId, std::shared_ptr<TripLog>> trips_;
  AppendListener listener_;
};

// Reads a states.jsonl file back into records.
Expected<std::vector<StateRecord>> read_state_log(const std::filesystem::path& path);

}  // namespace rucs
