#include "rucs/validation.hpp"

#include <cmath>
#include <string>

namespace rucs {

namespace {

bool in_closed(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

}  // namespace

Status validate_location(const LocationState& l) {
  if (!in_closed(l.latitude, -90.0, 90.0)) {
    return make_error(ErrorCode::range_violation, "latitude out of [-90, 90]: " + std::to_string(l.latitude));
  }
  if (!in_closed(l.longitude, -180.0, 180.0)) {
    return make_error(ErrorCode::range_violation,
                      "longitude out of [-180, 180]: " + std::to_string(l.longitude));
  }
  if (!std::isfinite(l.speed) || l.speed < 0.0) {
    return make_error(ErrorCode::range_violation, "speed must be >= 0: " + std::to_string(l.speed));
  }
  if (!std::isfinite(l.heading) || l.heading < 0.0 || l.heading >= 360.0) {
    return make_error(ErrorCode::range_violation, "heading out of [0, 360): " + std::to_string(l.heading));
  }
  return ok();
}

Status validate_state_record(const StateRecord& record, const TripContext& trip) {
  if (!record.location) return make_error(ErrorCode::missing_location, "location state is mandatory");
  if (auto s = validate_location(*record.location); !s) return s;
  if (record.engine && record.engine->rpm && (!std::isfinite(*record.engine->rpm) || *record.engine->rpm < 0.0)) {
    return make_error(ErrorCode::range_violation, "rpm must be >= 0");
  }
  if (trip.status != TripStatus::active) {
    return make_error(ErrorCode::trip_not_active, "trip " + record.trip.value + " is not active");
  }
  if (trip.last_seq && record.seq <= *trip.last_seq) {
    return make_error(ErrorCode::sequence_regression,
                      "seq " + std::to_string(record.seq) + " <= last " + std::to_string(*trip.last_seq));
  }
  return ok();
}

}  // namespace rucs
