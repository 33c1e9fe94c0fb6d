#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "rucs/clock.hpp"
#include "rucs/domain.hpp"
#include "rucs/ids.hpp"
#include "rucs/result.hpp"

namespace rucs {

struct VehicleFields {
  std::string model;
  int year = 0;
  std::string plate_number;
  std::string color;
  std::set<PropertyName> exposed_properties;
  std::set<ActionName> exposed_actions;
};

struct Registration {
  UserAccount account;
  VehicleProfile vehicle;
  std::string token;
};

// Accounts, vehicles, issued tokens and trips. get_topic() is the metered
// topic read behind the action router's cache; store_reads() counts it.
class Registry {
 public:
  explicit Registry(const Clock& clock) : clock_(clock) {}
  Registry(const Clock& clock, std::uint64_t id_seed) : clock_(clock), ids_(id_seed) {}

  // Exposure sets are taken as given; catalog checks belong to the caller.
  Expected<Registration> register_user(std::string display_name, std::string credential,
                                       VehicleFields vehicle);

  [[nodiscard]] Expected<UserId> authenticate(std::string_view token) const;
  [[nodiscard]] Expected<VehicleProfile> vehicle(const VehicleId& id) const;

  Expected<Trip> start_trip(const VehicleId& vehicle);
  Expected<Trip> complete_trip(const TripId& trip);

  [[nodiscard]] Expected<Trip> trip(const TripId& id) const;
  // Listen topic of an active trip.
  [[nodiscard]] std::optional<TopicName> get_topic(const TripId& id) const;

  [[nodiscard]] std::uint64_t store_reads() const { return store_reads_.load(); }
  [[nodiscard]] std::vector<UserAccount> accounts() const;

 private:
  const Clock& clock_;
  IdGenerator ids_;
  mutable std::mutex mutex_;
  std::unordered_map<UserId, UserAccount> users_;
  std::unordered_map<std::string, UserId> tokens_;
  std::unordered_map<VehicleId, VehicleProfile> vehicles_;
  std::set<std::string> plates_;
  std::unordered_map<TripId, Trip> trips_;
  std::unordered_map<VehicleId, TripId> active_by_vehicle_;
  mutable std::atomic<std::uint64_t> store_reads_{0};
};

}  // namespace rucs
