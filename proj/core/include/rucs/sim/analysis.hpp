#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rucs/result.hpp"

namespace rucs::sim {

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Linear interpolation between closest ranks (the R-7 / numpy default).
// `sorted` must be ascending and non-empty; q in [0, 1].
double percentile(const std::vector<double>& sorted, double q);
std::optional<SampleStats> describe_samples(std::vector<double> samples);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

// Fixed-width bins from 0 through the bin holding the largest sample.
std::vector<HistogramBin> histogram(const std::vector<double>& samples, double width);

inline const std::vector<std::string>& request_kinds() {
  static const std::vector<std::string> kinds{"neighbors", "state", "property", "action"};
  return kinds;
}

struct Report {
  nlohmann::json summary;
  std::string delay_histogram_csv;
  std::string distance_histogram_csv;
  std::string gps_trace_csv;
};

inline constexpr double kDelayBinSeconds = 0.010;
inline constexpr double kDistanceBinMeters = 0.25;

// Builds the report from the run directory alone. Fails with MissingLogs
// when run.json, latency.csv or traces.csv is absent or unreadable.
Expected<Report> analyze_run(const std::filesystem::path& run_dir);

// analyze_run plus writing <run_dir>/report/{summary.json, delay_histogram.csv,
// distance_histogram.csv, gps_trace.csv}.
Expected<Report> analyze_and_write(const std::filesystem::path& run_dir);

}  // namespace rucs::sim
