#include "rucs/sim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rucs/geo_index.hpp"

namespace rucs::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double lerp(double a, double b, double f) { return a + (b - a) * f; }

double lerp_heading(double a, double b, double f) {
  double d = std::fmod(b - a + 540.0, 360.0) - 180.0;
  double h = std::fmod(a + d * f + 360.0, 360.0);
  return h >= 360.0 ? h - 360.0 : h;
}

}  // namespace

Trace::Trace(std::vector<TracePoint> points) : points_(std::move(points)) {
  std::stable_sort(points_.begin(), points_.end(),
                   [](const TracePoint& a, const TracePoint& b) { return a.t_s < b.t_s; });
}

TracePoint Trace::at(double t_s) const {
  if (points_.empty()) return TracePoint{t_s};
  if (t_s <= points_.front().t_s) return TracePoint{t_s, points_.front().lat, points_.front().lon,
                                                    points_.front().speed_mps, points_.front().heading_deg};
  if (t_s >= points_.back().t_s) return TracePoint{t_s, points_.back().lat, points_.back().lon,
                                                   points_.back().speed_mps, points_.back().heading_deg};
  const auto hi = std::upper_bound(points_.begin(), points_.end(), t_s,
                                   [](double t, const TracePoint& p) { return t < p.t_s; });
  const auto lo = hi - 1;
  const double span = hi->t_s - lo->t_s;
  const double f = span > 0 ? (t_s - lo->t_s) / span : 0.0;
  return TracePoint{t_s, lerp(lo->lat, hi->lat, f), lerp(lo->lon, hi->lon, f),
                    lerp(lo->speed_mps, hi->speed_mps, f), lerp_heading(lo->heading_deg, hi->heading_deg, f)};
}

std::string trace_to_csv(const Trace& trace) {
  std::string out = "t_s,lat,lon,speed_mps,heading_deg\n";
  char buf[160];
  for (const auto& p : trace.points()) {
    std::snprintf(buf, sizeof buf, "%.3f,%.8f,%.8f,%.4f,%.3f\n", p.t_s, p.lat, p.lon, p.speed_mps,
                  p.heading_deg);
    out += buf;
  }
  return out;
}

Expected<Trace> trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_s,lat,lon,speed_mps,heading_deg", 0) != 0) {
    return make_error(ErrorCode::scenario_invalid, "trace header must be t_s,lat,lon,speed_mps,heading_deg");
  }
  std::vector<TracePoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    TracePoint p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &p.t_s, &p.lat, &p.lon, &p.speed_mps, &p.heading_deg) != 5) {
      return make_error(ErrorCode::scenario_invalid, "trace line " + std::to_string(line_no) + " is malformed");
    }
    const LocationState loc{p.lat, p.lon, p.speed_mps, p.heading_deg};
    if (!std::isfinite(p.t_s) || std::fabs(loc.latitude) > 90 || std::fabs(loc.longitude) > 180 ||
        loc.speed < 0 || loc.heading < 0 || loc.heading >= 360) {
      return make_error(ErrorCode::scenario_invalid, "trace line " + std::to_string(line_no) + " is out of range");
    }
    points.push_back(p);
  }
  if (points.empty()) return make_error(ErrorCode::scenario_invalid, "trace has no samples");
  return Trace{std::move(points)};
}

Expected<Trace> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::scenario_invalid, "cannot open trace " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return trace_from_csv(ss.str());
}

Status write_trace(const std::filesystem::path& path, const Trace& trace) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << trace_to_csv(trace);
  if (!out) return make_error(ErrorCode::io_error, "cannot write " + path.string());
  return ok();
}

TracePoint offset(const TracePoint& p, double forward_m, double right_m) {
  const double h = p.heading_deg * kDeg;
  const double north = forward_m * std::cos(h) - right_m * std::sin(h);
  const double east = forward_m * std::sin(h) + right_m * std::cos(h);
  TracePoint out = p;
  out.lat = p.lat + north / kEarthRadiusMeters / kDeg;
  out.lon = p.lon + east / (kEarthRadiusMeters * std::cos(p.lat * kDeg)) / kDeg;
  return out;
}

Trace straight_trace(const StraightTrace& spec) {
  std::vector<TracePoint> points;
  const TracePoint origin{0.0, spec.origin_lat, spec.origin_lon, spec.speed_mps, spec.heading_deg};
  const TracePoint start = offset(origin, spec.lead_m, spec.right_m);
  const auto samples = static_cast<std::size_t>(std::ceil(spec.duration_s / spec.sample_period_s));
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) * spec.sample_period_s;
    TracePoint p = offset(start, spec.speed_mps * t, 0.0);
    p.t_s = t;
    points.push_back(p);
  }
  return Trace{std::move(points)};
}

Trace field_test_trace(std::string_view lane, double duration_s) {
  StraightTrace spec;
  spec.duration_s = duration_s;
  if (lane == "left") {
    spec.lead_m = 10.0;
    spec.right_m = -kLaneWidthMeters / 2.0;
  } else {
    spec.right_m = kLaneWidthMeters / 2.0;
  }
  return straight_trace(spec);
}

}  // namespace rucs::sim
