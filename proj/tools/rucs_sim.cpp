#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "rucs/sim/analysis.hpp"
#include "rucs/sim/runner.hpp"
#include "rucs/sim/scenario.hpp"
#include "rucs/sim/trace.hpp"

namespace {

// One exit code per error class so scripts can tell them apart.
int exit_code(rucs::ErrorCode code) {
  switch (code) {
    case rucs::ErrorCode::scenario_invalid: return 2;
    case rucs::ErrorCode::service_unreachable: return 3;
    case rucs::ErrorCode::missing_logs: return 4;
    case rucs::ErrorCode::io_error: return 5;
    default: return 1;
  }
}

int fail(const rucs::Error& e) {
  std::cerr << "rucs-sim: " << rucs::to_string(e.code) << ": " << e.message << '\n';
  return exit_code(e.code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario runner and latency analysis for the road user communication service"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Drive a scenario against a running service");
  std::string scenario;
  std::string url = "http://127.0.0.1:8080";
  std::uint64_t seed = 1;
  std::string out;
  std::string latency;
  bool analyze_after = false;
  run->add_option("--scenario", scenario, "Preset (field-test, field-test-4g, load) or JSON file")->required();
  run->add_option("--url", url, "Service base URL");
  run->add_option("--seed", seed, "Random seed, recorded in the run directory");
  run->add_option("--out", out, "Run directory (default runs/<scenario>-<seed>)");
  run->add_option("--latency", latency, "Override injected latency: none or 4g");
  run->add_flag("--analyze", analyze_after, "Write the report right after the run");

  auto* analyze = app.add_subcommand("analyze", "Build the report of a finished run");
  std::string run_dir;
  analyze->add_option("--run", run_dir, "Run directory")->required();

  auto* gen = app.add_subcommand("gen-trace", "Write a GPS trace CSV");
  std::string preset = "field-test";
  std::string trace_out;
  std::string vehicle = "A";
  double duration = 40.0;
  gen->add_option("--preset", preset, "Trace preset")->check(CLI::IsMember({"field-test"}));
  gen->add_option("--out", trace_out, "Output file")->required();
  gen->add_option("--vehicle", vehicle, "A (left lane) or B (right lane)")->check(CLI::IsMember({"A", "B", "a", "b"}));
  gen->add_option("--duration", duration, "Seconds of trace")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    auto config = rucs::sim::load_scenario(scenario);
    if (!config) return fail(config.error());
    if (latency == "4g") {
      config->latency = rucs::sim::kProfile4G;
    } else if (latency == "none") {
      config->latency = {};
    } else if (!latency.empty()) {
      return fail(rucs::make_error(rucs::ErrorCode::scenario_invalid, "unknown latency profile " + latency));
    }
    rucs::sim::RunOptions options;
    options.url = url;
    options.seed = seed;
    options.out = out.empty() ? std::filesystem::path("runs") / (config->name + "-" + std::to_string(seed)) : std::filesystem::path(out);
    auto summary = rucs::sim::run_scenario(*config, options);
    if (!summary) return fail(summary.error());
    std::printf("run: %s\nrequests: %zu\nerrors: %zu\nwall_s: %.2f\ncounts: %s\n", summary->dir.c_str(),
                summary->requests, summary->errors, summary->wall_s, summary->counts.dump().c_str());
    for (const auto& d : summary->decisions) {
      std::printf("decision: %s -> %s at t=%.2fs: %s (%s)\n", d.vehicle.c_str(), d.target.c_str(), d.t_s,
                  std::string(rucs::sim::to_string(d.decision)).c_str(), d.result.value("value", nlohmann::json{}).dump().c_str());
    }
    if (analyze_after) {
      auto report = rucs::sim::analyze_and_write(options.out);
      if (!report) return fail(report.error());
    }
    return 0;
  }

  if (*analyze) {
    auto report = rucs::sim::analyze_and_write(run_dir);
    if (!report) return fail(report.error());
    std::cout << report->summary.dump(2) << '\n';
    return 0;
  }

  const bool left = vehicle == "A" || vehicle == "a";
  auto s = rucs::sim::write_trace(trace_out, rucs::sim::field_test_trace(left ? "left" : "right", duration));
  if (!s) return fail(s.error());
  return 0;
}
