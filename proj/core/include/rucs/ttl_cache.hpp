#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "rucs/clock.hpp"
#include "rucs/result.hpp"

namespace rucs {

// Key-value cache with per-entry TTL on an injected clock. Every get()
// counts as exactly one hit or one miss; exists() is not counted.
class TtlCache {
 public:
  struct Counters {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
  };

  explicit TtlCache(const Clock& clock) : clock_(clock) {}

  Status put(const std::string& key, std::string value, double ttl_seconds);
  [[nodiscard]] std::optional<std::string> get(const std::string& key);
  [[nodiscard]] bool exists(const std::string& key) const;
  void erase(const std::string& key);

  [[nodiscard]] Counters counters() const { return {hits_.load(), misses_.load()}; }
  [[nodiscard]] std::size_t size() const;

 private:
  struct Entry {
    std::string value;
    Timestamp expires_at;
  };

  const Clock& clock_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Entry> entries_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

}  // namespace rucs
