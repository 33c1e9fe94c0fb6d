#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "rucs/clock.hpp"
#include "rucs/domain.hpp"
#include "rucs/result.hpp"

namespace rucs {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

// Great-circle distance on a sphere of radius 6371 km. Symmetric in its
// arguments bit for bit.
double haversine_distance(const LocationState& a, const LocationState& b);

// Latest position per active trip plus what neighbors may learn about it.
class GeoIndex {
 public:
  struct TripProfile {
    VehicleDescription description;
    std::set<PropertyName> exposed_properties;
    std::set<ActionName> exposed_actions;
  };

  struct PositionSnapshot {
    TripId trip;
    LocationState location;
    Timestamp observed_at;
    std::int64_t seq = 0;
  };

  explicit GeoIndex(const Clock& clock) : clock_(clock) {}

  // Makes a trip eligible for positions and neighbor lists.
  void activate(const TripId& trip, TripProfile profile);
  // Drops the trip and its snapshot.
  void evict(const TripId& trip);

  // Replaces the trip's snapshot unless the stored one has a higher seq.
  Status upsert_position(const TripId& trip, const LocationState& location, Timestamp observed_at,
                         std::int64_t seq = 0);

  // Active trips other than `of` whose snapshot is at most max_age_s old and
  // within radius_m, nearest first, ties by trip id.
  [[nodiscard]] Expected<std::vector<NeighborInfo>> neighbors(const TripId& of, double radius_m,
                                                              double max_age_s) const;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] bool is_active(const TripId& trip) const;
  [[nodiscard]] std::vector<PositionSnapshot> snapshots() const;

 private:
  struct Slot {
    TripProfile profile;
    std::optional<PositionSnapshot> snapshot;
  };

  const Clock& clock_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<TripId, Slot> trips_;
};

}  // namespace rucs
