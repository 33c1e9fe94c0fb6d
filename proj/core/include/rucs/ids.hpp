#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace rucs {

// Thread-safe generator of opaque random identifiers: `<prefix><hex>`.
class IdGenerator {
 public:
  IdGenerator();
  explicit IdGenerator(std::uint64_t seed) : engine_(seed) {}

  std::string next(std::string_view prefix, std::size_t hex_digits = 16);

 private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

}  // namespace rucs
