#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rucs/domain.hpp"
#include "rucs/result.hpp"

namespace rucs::sim {

struct TracePoint {
  double t_s = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  double speed_mps = 0.0;
  double heading_deg = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

// Time-ordered GPS samples; positions between samples are interpolated
// linearly and clamped at both ends.
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<TracePoint> points);

  [[nodiscard]] TracePoint at(double t_s) const;
  [[nodiscard]] const std::vector<TracePoint>& points() const { return points_; }
  [[nodiscard]] bool empty() const { return points_.empty(); }
  [[nodiscard]] double duration_s() const { return points_.empty() ? 0.0 : points_.back().t_s; }

 private:
  std::vector<TracePoint> points_;
};

// CSV with header `t_s,lat,lon,speed_mps,heading_deg`.
std::string trace_to_csv(const Trace& trace);
Expected<Trace> trace_from_csv(const std::string& text);
Expected<Trace> read_trace(const std::filesystem::path& path);
Status write_trace(const std::filesystem::path& path, const Trace& trace);

// Moves a position by meters along (forward) and across (right) a heading.
TracePoint offset(const TracePoint& p, double forward_m, double right_m);

struct StraightTrace {
  double origin_lat = 48.18;
  double origin_lon = 14.12;
  double heading_deg = 90.0;
  double speed_mps = 50.0 / 3.6;
  double duration_s = 60.0;
  double sample_period_s = 0.1;
  // Start position shift along the heading and to its right.
  double lead_m = 0.0;
  double right_m = 0.0;
};

Trace straight_trace(const StraightTrace& spec);

inline constexpr double kLaneWidthMeters = 3.5;

// Two-lane straight eastbound segment at 50 km/h. The left-lane vehicle
// starts 10 m ahead of the right-lane one.
Trace field_test_trace(std::string_view lane, double duration_s);

}  // namespace rucs::sim
