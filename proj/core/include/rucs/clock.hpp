#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rucs {

// UTC instant with millisecond precision.
struct Timestamp {
  std::int64_t ms = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

  [[nodiscard]] Timestamp plus_ms(std::int64_t delta) const { return Timestamp{ms + delta}; }
  [[nodiscard]] Timestamp plus_seconds(double s) const {
    return Timestamp{ms + static_cast<std::int64_t>(s * 1000.0)};
  }
};

inline double seconds_between(Timestamp from, Timestamp to) {
  return static_cast<double>(to.ms - from.ms) / 1000.0;
}

// RFC-3339 in UTC with exactly three fractional digits, e.g.
// "2021-06-01T10:00:00.250Z".
std::string format_rfc3339(Timestamp t);

// Accepts "Z" or a numeric offset; fractional seconds beyond milliseconds
// are truncated.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

class Clock {
 public:
  virtual ~Clock() = default;
  [[nodiscard]] virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  [[nodiscard]] Timestamp now() const override;
};

// Test clock; only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{1'622'541'600'000}) : now_ms_(start.ms) {}

  [[nodiscard]] Timestamp now() const override { return Timestamp{now_ms_.load()}; }
  void advance_ms(std::int64_t ms) { now_ms_ += ms; }
  void advance_seconds(double s) { now_ms_ += static_cast<std::int64_t>(s * 1000.0); }
  void set(Timestamp t) { now_ms_ = t.ms; }

 private:
  std::atomic<std::int64_t> now_ms_;
};

}  // namespace rucs
