#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace rucs {

// One code per error category named by the service contract. Codes are
// stable: they appear verbatim (snake_case) in HTTP error bodies.
enum class ErrorCode {
  bad_request,
  missing_location,
  range_violation,
  trip_not_active,
  sequence_regression,
  not_found,
  no_own_position,
  no_data,
  no_such_topic,
  pattern_violation,
  no_handler,
  permission_denied,
  schema_invalid,
  unknown_task,
  no_topic,
  invalid_timeout,
  unknown_correlation,
  expired,
  duplicate_plate,
  invalid_exposure,
  unauthorized,
  forbidden,
  trip_already_active,
  internal,
  // harness
  scenario_invalid,
  service_unreachable,
  missing_logs,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// HTTP status for an error category: validation and routing failures are
// 4xx, handler faults are 5xx.
int http_status(ErrorCode code) noexcept;

struct Error {
  ErrorCode code = ErrorCode::internal;
  std::string message;

  friend bool operator==(const Error& a, const Error& b) { return a.code == b.code; }
};

inline Error make_error(ErrorCode code, std::string message = {}) {
  return Error{code, std::move(message)};
}

// Minimal value-or-error carrier. Accessing the wrong alternative throws
// std::bad_variant_access.
template <typename T>
class Expected {
 public:
  Expected(T value) : data_(std::in_place_index<0>, std::move(value)) {}  // NOLINT
  Expected(Error error) : data_(std::in_place_index<1>, std::move(error)) {}  // NOLINT

  [[nodiscard]] bool has_value() const noexcept { return data_.index() == 0; }
  explicit operator bool() const noexcept { return has_value(); }

  T& value() & { return std::get<0>(data_); }
  const T& value() const& { return std::get<0>(data_); }
  T&& value() && { return std::get<0>(std::move(data_)); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  [[nodiscard]] const Error& error() const { return std::get<1>(data_); }

 private:
  std::variant<T, Error> data_;
};

struct Ok {
  friend bool operator==(Ok, Ok) { return true; }
};

using Status = Expected<Ok>;

inline Status ok() { return Ok{}; }

}  // namespace rucs
