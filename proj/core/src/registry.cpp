#include "rucs/registry.hpp"

namespace rucs {

Expected<Registration> Registry::register_user(std::string display_name, std::string credential,
                                               VehicleFields fields) {
  std::lock_guard lock(mutex_);
  if (plates_.contains(fields.plate_number)) {
    return make_error(ErrorCode::duplicate_plate, "plate number already registered");
  }
  UserAccount account{UserId{ids_.next("u")}, std::move(credential), std::move(display_name)};
  VehicleProfile vehicle{VehicleId{ids_.next("v")},
                         account.user_id,
                         std::move(fields.model),
                         fields.year,
                         fields.plate_number,
                         std::move(fields.color),
                         std::move(fields.exposed_properties),
                         std::move(fields.exposed_actions)};
  std::string token = ids_.next("tok", 32);

  plates_.insert(fields.plate_number);
  users_.emplace(account.user_id, account);
  vehicles_.emplace(vehicle.vehicle_id, vehicle);
  tokens_.emplace(token, account.user_id);
  return Registration{std::move(account), std::move(vehicle), std::move(token)};
}

Expected<UserId> Registry::authenticate(std::string_view token) const {
  std::lock_guard lock(mutex_);
  const auto it = tokens_.find(std::string(token));
  if (it == tokens_.end()) return make_error(ErrorCode::unauthorized, "invalid token");
  return it->second;
}

Expected<VehicleProfile> Registry::vehicle(const VehicleId& id) const {
  std::lock_guard lock(mutex_);
  const auto it = vehicles_.find(id);
  if (it == vehicles_.end()) return make_error(ErrorCode::not_found, "unknown vehicle");
  return it->second;
}

Expected<Trip> Registry::start_trip(const VehicleId& vehicle) {
  std::lock_guard lock(mutex_);
  if (!vehicles_.contains(vehicle)) return make_error(ErrorCode::not_found, "unknown vehicle");
  if (active_by_vehicle_.contains(vehicle)) {
    return make_error(ErrorCode::trip_already_active, "vehicle already has an active trip");
  }
  TripId id{ids_.next("t")};
  while (trips_.contains(id)) id = TripId{ids_.next("t")};
  Trip trip{id, vehicle, TripStatus::active, listen_topic_for(id), send_topic_for(id), clock_.now(),
            std::nullopt};
  trips_.emplace(id, trip);
  active_by_vehicle_.emplace(vehicle, id);
  return trip;
}

Expected<Trip> Registry::complete_trip(const TripId& id) {
  std::lock_guard lock(mutex_);
  const auto it = trips_.find(id);
  if (it == trips_.end() || it->second.status != TripStatus::active) {
    return make_error(ErrorCode::trip_not_active, "trip is not active");
  }
  it->second.status = TripStatus::completed;
  it->second.completed_at = clock_.now();
  active_by_vehicle_.erase(it->second.vehicle);
  return it->second;
}

Expected<Trip> Registry::trip(const TripId& id) const {
  std::lock_guard lock(mutex_);
  const auto it = trips_.find(id);
  if (it == trips_.end()) return make_error(ErrorCode::not_found, "unknown trip");
  return it->second;
}

std::optional<TopicName> Registry::get_topic(const TripId& id) const {
  ++store_reads_;
  std::lock_guard lock(mutex_);
  const auto it = trips_.find(id);
  if (it == trips_.end() || it->second.status != TripStatus::active) return std::nullopt;
  return it->second.listen_topic;
}

std::vector<UserAccount> Registry::accounts() const {
  std::lock_guard lock(mutex_);
  std::vector<UserAccount> out;
  out.reserve(users_.size());
  for (const auto& [id, account] : users_) out.push_back(account);
  return out;
}

}  // namespace rucs
