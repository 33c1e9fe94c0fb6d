#include "rucs/result.hpp"

namespace rucs {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::missing_location: return "missing_location";
    case ErrorCode::range_violation: return "range_violation";
    case ErrorCode::trip_not_active: return "trip_not_active";
    case ErrorCode::sequence_regression: return "sequence_regression";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::no_own_position: return "no_own_position";
    case ErrorCode::no_data: return "no_data";
    case ErrorCode::no_such_topic: return "no_such_topic";
    case ErrorCode::pattern_violation: return "pattern_violation";
    case ErrorCode::no_handler: return "no_handler";
    case ErrorCode::permission_denied: return "permission_denied";
    case ErrorCode::schema_invalid: return "schema_invalid";
    case ErrorCode::unknown_task: return "unknown_task";
    case ErrorCode::no_topic: return "no_topic";
    case ErrorCode::invalid_timeout: return "invalid_timeout";
    case ErrorCode::unknown_correlation: return "unknown_correlation";
    case ErrorCode::expired: return "expired";
    case ErrorCode::duplicate_plate: return "duplicate_plate";
    case ErrorCode::invalid_exposure: return "invalid_exposure";
    case ErrorCode::unauthorized: return "unauthorized";
    case ErrorCode::forbidden: return "forbidden";
    case ErrorCode::trip_already_active: return "trip_already_active";
    case ErrorCode::internal: return "internal";
    case ErrorCode::scenario_invalid: return "scenario_invalid";
    case ErrorCode::service_unreachable: return "service_unreachable";
    case ErrorCode::missing_logs: return "missing_logs";
    case ErrorCode::io_error: return "io_error";
  }
  return "internal";
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::bad_request:
    case ErrorCode::missing_location:
    case ErrorCode::range_violation:
    case ErrorCode::sequence_regression:
    case ErrorCode::pattern_violation:
    case ErrorCode::no_topic:
    case ErrorCode::invalid_timeout:
    case ErrorCode::invalid_exposure:
    case ErrorCode::no_own_position:
      return 400;
    case ErrorCode::unauthorized:
      return 401;
    case ErrorCode::forbidden:
    case ErrorCode::permission_denied:
      return 403;
    case ErrorCode::not_found:
    case ErrorCode::no_data:
    case ErrorCode::no_handler:
    case ErrorCode::unknown_task:
    case ErrorCode::unknown_correlation:
    case ErrorCode::no_such_topic:
      return 404;
    case ErrorCode::trip_not_active:
    case ErrorCode::duplicate_plate:
    case ErrorCode::trip_already_active:
      return 409;
    case ErrorCode::expired:
      return 410;
    case ErrorCode::schema_invalid:
    case ErrorCode::internal:
    case ErrorCode::scenario_invalid:
    case ErrorCode::missing_logs:
    case ErrorCode::io_error:
      return 500;
    case ErrorCode::service_unreachable:
      return 503;
  }
  return 500;
}

}  // namespace rucs
