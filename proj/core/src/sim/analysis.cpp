#include "rucs/sim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rucs/geo_index.hpp"
#include "rucs/sim/decision.hpp"
#include "rucs/sim/runner.hpp"

namespace rucs::sim {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Expected<std::vector<std::vector<std::string>>> read_csv(const std::filesystem::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::missing_logs, "missing " + path.string());
  std::string line;
  if (!std::getline(in, line)) return make_error(ErrorCode::missing_logs, path.string() + " has no header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != columns) {
      return make_error(ErrorCode::missing_logs, path.string() + " has a malformed row: " + line);
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::optional<double> number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Rounded so the summary reads cleanly; rounding is deterministic.
double tidy(double v) { return std::round(v * 1e9) / 1e9; }

json stats_json(const SampleStats& s) {
  return json{{"count", s.count},      {"mean", tidy(s.mean)}, {"median", tidy(s.median)},
              {"p95", tidy(s.p95)},    {"min", tidy(s.min)},   {"max", tidy(s.max)}};
}

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

struct KindSamples {
  std::vector<double> rtt;
  std::vector<double> processing;
  std::size_t errors = 0;
};

}  // namespace

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::optional<SampleStats> describe_samples(std::vector<double> samples) {
  if (samples.empty()) return std::nullopt;
  std::sort(samples.begin(), samples.end());
  SampleStats s;
  s.count = samples.size();
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  s.median = percentile(samples, 0.5);
  s.p95 = percentile(samples, 0.95);
  s.min = samples.front();
  s.max = samples.back();
  return s;
}

std::vector<HistogramBin> histogram(const std::vector<double>& samples, double width) {
  if (samples.empty() || !(width > 0)) return {};
  const double top = *std::max_element(samples.begin(), samples.end());
  const auto bins = static_cast<std::size_t>(std::floor(std::max(0.0, top) / width)) + 1;
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].lower = static_cast<double>(i) * width;
    out[i].upper = static_cast<double>(i + 1) * width;
  }
  for (double v : samples) {
    const auto i = std::min(bins - 1, static_cast<std::size_t>(std::floor(std::max(0.0, v) / width)));
    ++out[i].count;
  }
  return out;
}

Expected<Report> analyze_run(const std::filesystem::path& run_dir) {
  json run;
  {
    std::ifstream in(run_dir / kRunFile);
    if (!in) return make_error(ErrorCode::missing_logs, "missing " + (run_dir / kRunFile).string());
    try {
      in >> run;
    } catch (const std::exception&) {
      return make_error(ErrorCode::missing_logs, (run_dir / kRunFile).string() + " is not valid JSON");
    }
  }
  auto latency = read_csv(run_dir / kLatencyFile, 7);
  if (!latency) return latency.error();
  auto traces = read_csv(run_dir / kTracesFile, 7);
  if (!traces) return traces.error();

  const auto& scenario = run.contains("scenario") ? run.at("scenario") : json::object();
  const double speed = scenario.value("analysis_speed_mps", 50.0 / 3.6);

  std::map<std::string, KindSamples> by_kind;
  for (const auto& row : *latency) {
    const auto rtt = number(row[4]);
    const auto processing = number(row[5]);
    const auto status = number(row[6]);
    if (!rtt || !processing || !status) {
      return make_error(ErrorCode::missing_logs, "latency.csv has a non-numeric field");
    }
    auto& k = by_kind[row[1]];
    if (*status < 200 || *status >= 300) {
      ++k.errors;
      continue;
    }
    k.rtt.push_back(*rtt);
    k.processing.push_back(*processing);
  }

  Report report;
  json kinds = json::object();
  std::vector<double> all_rtt;
  std::vector<double> all_processing;
  std::string delay_csv = "kind,bin_lower_ms,bin_upper_ms,count\n";
  std::string distance_csv = "kind,bin_lower_m,bin_upper_m,count\n";

  const auto emit_histograms = [&](const std::string& kind, const std::vector<double>& rtt) {
    for (const auto& b : histogram(rtt, kDelayBinSeconds)) {
      delay_csv += kind + "," + fixed(b.lower * 1000.0, 0) + "," + fixed(b.upper * 1000.0, 0) + "," +
                   std::to_string(b.count) + "\n";
    }
    std::vector<double> distances;
    distances.reserve(rtt.size());
    for (double d : rtt) distances.push_back(distance_during_delay(speed, d));
    for (const auto& b : histogram(distances, kDistanceBinMeters)) {
      distance_csv += kind + "," + fixed(b.lower, 2) + "," + fixed(b.upper, 2) + "," + std::to_string(b.count) + "\n";
    }
  };

  // Fixed kinds first in their canonical order, then anything unexpected.
  std::vector<std::string> order = request_kinds();
  for (const auto& [kind, _] : by_kind) {
    if (std::find(order.begin(), order.end(), kind) == order.end()) order.push_back(kind);
  }
  for (const auto& kind : order) {
    const auto it = by_kind.find(kind);
    const KindSamples empty;
    const auto& k = it == by_kind.end() ? empty : it->second;
    const auto rtt = describe_samples(k.rtt);
    if (!rtt) {
      kinds[kind] = "no samples";
      continue;
    }
    std::vector<double> distances;
    for (double d : k.rtt) distances.push_back(distance_during_delay(speed, d));
    kinds[kind] = json{{"samples", rtt->count},
                       {"errors", k.errors},
                       {"rtt_s", stats_json(*rtt)},
                       {"server_processing_s", stats_json(*describe_samples(k.processing))},
                       {"distance_m", stats_json(*describe_samples(distances))}};
    all_rtt.insert(all_rtt.end(), k.rtt.begin(), k.rtt.end());
    all_processing.insert(all_processing.end(), k.processing.begin(), k.processing.end());
    emit_histograms(kind, k.rtt);
  }

  json summary = {{"scenario", scenario.value("name", std::string("unknown"))},
                  {"seed", run.value("seed", 0)},
                  {"analysis_speed_mps", tidy(speed)},
                  {"kinds", kinds},
                  {"reference",
                   {{"speed_mps", tidy(speed)},
                    {"delay_s", 0.25},
                    {"distance_m", tidy(distance_during_delay(speed, 0.25))}}}};
  if (const auto all = describe_samples(all_rtt)) {
    std::vector<double> distances;
    for (double d : all_rtt) distances.push_back(distance_during_delay(speed, d));
    summary["all"] = json{{"rtt_s", stats_json(*all)},
                          {"server_processing_s", stats_json(*describe_samples(all_processing))},
                          {"distance_m", stats_json(*describe_samples(distances))}};
  } else {
    summary["all"] = "no samples";
  }

  std::ifstream counts_in(run_dir / kCountsFile);
  if (counts_in) {
    try {
      json counts;
      counts_in >> counts;
      summary["counts"] = counts;
    } catch (const std::exception&) {
      // Counts are informative only; the latency log is authoritative.
    }
  }

  // Local east/north meters around the first sample make the plot readable.
  std::string gps = "vehicle,t_s,lat,lon,east_m,north_m,speed_mps,phase\n";
  if (!traces->empty()) {
    const auto lat0 = number((*traces)[0][2]).value_or(0.0);
    const auto lon0 = number((*traces)[0][3]).value_or(0.0);
    constexpr double kDeg = std::numbers::pi / 180.0;
    for (const auto& row : *traces) {
      const double lat = number(row[2]).value_or(0.0);
      const double lon = number(row[3]).value_or(0.0);
      const double north = (lat - lat0) * kDeg * kEarthRadiusMeters;
      const double east = (lon - lon0) * kDeg * kEarthRadiusMeters * std::cos(lat0 * kDeg);
      gps += row[0] + "," + row[1] + "," + row[2] + "," + row[3] + "," + fixed(east, 3) + "," + fixed(north, 3) + "," +
             row[4] + "," + row[6] + "\n";
    }
  }

  report.summary = std::move(summary);
  report.delay_histogram_csv = std::move(delay_csv);
  report.distance_histogram_csv = std::move(distance_csv);
  report.gps_trace_csv = std::move(gps);
  return report;
}

Expected<Report> analyze_and_write(const std::filesystem::path& run_dir) {
  auto report = analyze_run(run_dir);
  if (!report) return report;
  const auto dir = run_dir / "report";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return make_error(ErrorCode::io_error, "cannot create " + dir.string());
  const auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
  };
  if (!write("summary.json", report->summary.dump(2) + "\n") ||
      !write("delay_histogram.csv", report->delay_histogram_csv) ||
      !write("distance_histogram.csv", report->distance_histogram_csv) ||
      !write("gps_trace.csv", report->gps_trace_csv)) {
    return make_error(ErrorCode::io_error, "cannot write report into " + dir.string());
  }
  return report;
}

}  // namespace rucs::sim
