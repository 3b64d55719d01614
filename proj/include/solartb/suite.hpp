#pragma once

// The full evaluation: spectral match at six levels, 8x8 uniformity scan,
// short-term instability with and without feedback, long-term instability
// with feedback, and the combined IEC verdict.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "solartb/experiment.hpp"

namespace solartb {

/// Levels at which spectral match is evaluated, W/m^2.
inline constexpr std::array<double, 6> kSuiteLevels{1.0, 10.0, 50.0, 300.0, 500.0, 750.0};

struct SpectralLevel {
  double level_w_m2 = 0.0;
  iec::BinFractions fractions;
  iec::SpectralMatch match;
};

struct UniformityResult {
  int grid_n = 0;
  /// Row-major, row 0 at the door, each value divided by the grid mean.
  std::vector<double> normalized;
  iec::MetricResult metric;
  /// Mean of the normalized values in the door half and the rear half.
  double front_mean = 0.0;
  double rear_mean = 0.0;
};

struct SuiteReport {
  std::vector<SpectralLevel> spectral;
  UniformityResult uniformity;
  ExperimentResult sti_open;
  ExperimentResult sti_closed;
  ExperimentResult lti;
  iec::ClassificationResult overall;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
};

/// Runs every evaluation on `port`. `cfg` supplies the experiment settings
/// and the fingerprint embedded in the report.
SuiteReport run_suite(TestbedPort& port, const SystemConfig& cfg, std::uint64_t seed);

UniformityResult evaluate_uniformity(const std::vector<double>& grid, int grid_n);

/// Worst level: lowest grade, ties broken by largest deviation from 1.
iec::SpectralMatch combined_spectral(const std::vector<SpectralLevel>& levels);

/// Overall verdict rebuilt from the parts of a report (feedback STI).
iec::ClassificationResult recompute_overall(const SuiteReport& r);

/// Schema 1. Byte-identical for identical inputs.
std::string report_json(const SuiteReport& r);

/// Writes report.json, spectral.csv, uniformity.csv, sti_open.csv,
/// sti_closed.csv and lti.csv into `dir` (created if missing).
/// Throws Error(Io).
void write_report(const SuiteReport& r, const std::filesystem::path& dir);

std::string tool_version();

}  // namespace solartb
