#pragma once

// Short- and long-term instability experiments in virtual time, plus paired
// open/closed-loop batches over many seeds.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "solartb/testbed.hpp"

namespace solartb {

struct StiOptions {
  double level_w_m2 = 750.0;
  double duration_s = 180.0;
  double cadence_s = 1.0;
  double settle_s = 300.0;
  bool feedback = false;
};

struct LtiOptions {
  double level_w_m2 = 500.0;
  int samples = 140;
  double interval_s = 1800.0;
  bool feedback = true;
};

StiOptions sti_options(const ExperimentSettings& e, bool feedback);
LtiOptions lti_options(const ExperimentSettings& e, bool feedback);

struct ExperimentResult {
  iec::InstabilityKind kind = iec::InstabilityKind::Short;
  iec::MeasurementSeries series;
  iec::MetricResult metric;
  bool feedback = false;
  std::uint64_t seed = 0;
  double level_w_m2 = 0.0;

  friend bool operator==(const ExperimentResult& a, const ExperimentResult& b) {
    return a.kind == b.kind && a.series == b.series && a.metric.percent == b.metric.percent &&
           a.metric.grade == b.metric.grade && a.feedback == b.feedback && a.seed == b.seed &&
           a.level_w_m2 == b.level_w_m2;
  }
};

/// Resets the port, lights the board at the level, lets it settle, then
/// samples DUT current every cadence. Timestamps are k * cadence from the
/// start of the window. Throws Error(OutOfRange) unless
/// duration > 2 * cadence > 0.
ExperimentResult run_sti(TestbedPort& port, const StiOptions& opt, std::uint64_t seed);

/// Samples at k * interval for k = 1..samples after lighting the board.
/// Throws Error(OutOfRange) for fewer than two samples.
ExperimentResult run_lti(TestbedPort& port, const LtiOptions& opt, std::uint64_t seed);

/// CSV `timestamp_s,value`, one row per sample.
void write_series_csv(std::ostream& out, const ExperimentResult& r);
/// `{metric_percent, class, feedback, seed, config_hash, ...}`.
std::string result_json(const ExperimentResult& r, const std::string& config_hash);

struct PairedSti {
  ExperimentResult open_loop;
  ExperimentResult closed_loop;
};

/// Open- and closed-loop STI for each seed on private testbeds built from
/// `cfg`. The serial and OpenMP variants return identical results.
std::vector<PairedSti> paired_sti_serial(const SystemConfig& cfg, const StiOptions& opt,
                                         std::span<const std::uint64_t> seeds);
std::vector<PairedSti> paired_sti_omp(const SystemConfig& cfg, const StiOptions& opt,
                                      std::span<const std::uint64_t> seeds);

}  // namespace solartb
