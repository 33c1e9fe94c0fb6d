#pragma once

#include <optional>

#include "rucs/domain.hpp"
#include "rucs/result.hpp"

namespace rucs {

Status validate_location(const LocationState& location);

// What validation needs to know about the trip a record belongs to.
struct TripContext {
  TripStatus status = TripStatus::active;
  std::optional<std::int64_t> last_seq;
};

// Checks in order: location present, field ranges, trip active, seq
// strictly above the trip's last accepted seq.
Status validate_state_record(const StateRecord& record, const TripContext& trip);

}  // namespace rucs
