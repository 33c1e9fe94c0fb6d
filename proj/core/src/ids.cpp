#include "rucs/ids.hpp"

#include "rucs/domain.hpp"

namespace rucs {

IdGenerator::IdGenerator() {
  std::random_device rd;
  std::seed_seq seq{rd(), rd(), rd(), rd()};
  engine_.seed(seq);
}

std::string IdGenerator::next(std::string_view prefix, std::size_t hex_digits) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(prefix);
  out.reserve(prefix.size() + hex_digits);
  std::lock_guard lock(mutex_);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < hex_digits; ++i) {
    if (i % 16 == 0) bits = engine_();
    out.push_back(kHex[bits & 0xF]);
    bits >>= 4;
  }
  return out;
}

TopicName listen_topic_for(const TripId& trip) { return "trip." + trip.value + ".in"; }
TopicName send_topic_for(const TripId& trip) { return "trip." + trip.value + ".out"; }

bool is_valid_trip_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

bool is_valid_topic(std::string_view name) {
  constexpr std::string_view prefix = "trip.";
  if (name.substr(0, prefix.size()) != prefix) return false;
  name.remove_prefix(prefix.size());
  std::string_view id;
  if (name.ends_with(".in")) {
    id = name.substr(0, name.size() - 3);
  } else if (name.ends_with(".out")) {
    id = name.substr(0, name.size() - 4);
  } else {
    return false;
  }
  return is_valid_trip_id(id);
}

}  // namespace rucs
