#include "rucs/ttl_cache.hpp"

#include <cmath>

namespace rucs {

Status TtlCache::put(const std::string& key, std::string value, double ttl_seconds) {
  if (!std::isfinite(ttl_seconds) || ttl_seconds <= 0.0) {
    return make_error(ErrorCode::bad_request, "ttl must be > 0");
  }
  const Timestamp expires = clock_.now().plus_seconds(ttl_seconds);
  std::lock_guard lock(mutex_);
  entries_[key] = Entry{std::move(value), expires};
  return ok();
}

std::optional<std::string> TtlCache::get(const std::string& key) {
  const Timestamp now = clock_.now();
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end() || it->second.expires_at <= now) {
    if (it != entries_.end()) entries_.erase(it);
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second.value;
}

bool TtlCache::exists(const std::string& key) const {
  const Timestamp now = clock_.now();
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  return it != entries_.end() && it->second.expires_at > now;
}

void TtlCache::erase(const std::string& key) {
  std::lock_guard lock(mutex_);
  entries_.erase(key);
}

std::size_t TtlCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace rucs
