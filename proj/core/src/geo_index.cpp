#include "rucs/geo_index.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace rucs {

double haversine_distance(const LocationState& a, const LocationState& b) {
  constexpr double kDegToRad = std::numbers::pi / 180.0;
  const double lat_a = a.latitude * kDegToRad;
  const double lat_b = b.latitude * kDegToRad;
  const double dlat = std::fabs(b.latitude - a.latitude) * kDegToRad;
  const double dlon = std::fabs(b.longitude - a.longitude) * kDegToRad;
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  // cos terms multiplied in a fixed order so (a, b) and (b, a) agree exactly
  const double cos_lo = std::cos(std::min(lat_a, lat_b));
  const double cos_hi = std::cos(std::max(lat_a, lat_b));
  const double h = s_lat * s_lat + cos_lo * cos_hi * s_lon * s_lon;
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

void GeoIndex::activate(const TripId& trip, TripProfile profile) {
  std::unique_lock lock(mutex_);
  auto& slot = trips_[trip];
  slot.profile = std::move(profile);
}

void GeoIndex::evict(const TripId& trip) {
  std::unique_lock lock(mutex_);
  trips_.erase(trip);
}

Status GeoIndex::upsert_position(const TripId& trip, const LocationState& location,
                                 Timestamp observed_at, std::int64_t seq) {
  std::unique_lock lock(mutex_);
  const auto it = trips_.find(trip);
  if (it == trips_.end()) {
    return make_error(ErrorCode::trip_not_active, "trip " + trip.value + " is not active");
  }
  auto& snap = it->second.snapshot;
  if (snap && snap->seq > seq) return ok();
  snap = PositionSnapshot{trip, location, observed_at, seq};
  return ok();
}

Expected<std::vector<NeighborInfo>> GeoIndex::neighbors(const TripId& of, double radius_m,
                                                        double max_age_s) const {
  const Timestamp now = clock_.now();
  const auto max_age_ms = static_cast<std::int64_t>(std::llround(max_age_s * 1000.0));

  std::shared_lock lock(mutex_);
  const auto self = trips_.find(of);
  if (self == trips_.end()) {
    return make_error(ErrorCode::trip_not_active, "trip " + of.value + " is not active");
  }
  if (!self->second.snapshot) {
    return make_error(ErrorCode::no_own_position, "trip " + of.value + " has not reported a location");
  }
  const LocationState origin = self->second.snapshot->location;

  std::vector<NeighborInfo> out;
  for (const auto& [id, slot] : trips_) {
    if (id == of || !slot.snapshot) continue;
    if (now.ms - slot.snapshot->observed_at.ms > max_age_ms) continue;
    const double d = haversine_distance(origin, slot.snapshot->location);
    if (d > radius_m) continue;
    out.push_back(NeighborInfo{id, slot.profile.description, slot.snapshot->location, d,
                               slot.profile.exposed_properties, slot.profile.exposed_actions});
  }
  lock.unlock();

  std::sort(out.begin(), out.end(), [](const NeighborInfo& a, const NeighborInfo& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.trip.value < b.trip.value;
  });
  return out;
}

std::size_t GeoIndex::size() const {
  std::shared_lock lock(mutex_);
  return static_cast<std::size_t>(std::count_if(trips_.begin(), trips_.end(),
                                                [](const auto& kv) { return kv.second.snapshot.has_value(); }));
}

bool GeoIndex::is_active(const TripId& trip) const {
  std::shared_lock lock(mutex_);
  return trips_.contains(trip);
}

std::vector<GeoIndex::PositionSnapshot> GeoIndex::snapshots() const {
  std::shared_lock lock(mutex_);
  std::vector<PositionSnapshot> out;
  for (const auto& [id, slot] : trips_) {
    if (slot.snapshot) out.push_back(*slot.snapshot);
  }
  return out;
}

}  // namespace rucs
