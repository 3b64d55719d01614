#include "solartb/experiment.hpp"

#include <cmath>
#include <exception>
#include <ostream>

#include "json.hpp"

#include "solartb/error.hpp"
#include "solartb/format.hpp"

namespace solartb {

StiOptions sti_options(const ExperimentSettings& e, bool feedback) {
  return {e.sti_level_w_m2, e.sti_duration_s, e.sti_cadence_s, e.sti_settle_s, feedback};
}

LtiOptions lti_options(const ExperimentSettings& e, bool feedback) {
  return {e.lti_level_w_m2, e.lti_samples, e.lti_interval_s, feedback};
}

namespace {

void prepare(TestbedPort& port, double level, bool feedback, std::uint64_t seed) {
  port.reset();
  port.set_seed(seed);
  port.set_dut_temperature(kReferenceTempC);
  port.set_target(SpectralTarget::Am15g);
  port.set_irradiance(level);
  port.set_feedback(feedback);
}

ExperimentResult sample(TestbedPort& port, int n, double every, iec::InstabilityKind kind) {
  std::vector<double> ts, vs;
  ts.reserve(static_cast<std::size_t>(n));
  vs.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    port.advance(every);
    ts.push_back(k * every);
    vs.push_back(port.read_dut_current());
  }
  ExperimentResult r;
  r.kind = kind;
  r.series = iec::MeasurementSeries(std::move(ts), std::move(vs));
  r.metric = iec::instability(r.series, kind);
  return r;
}

}  // namespace

ExperimentResult run_sti(TestbedPort& port, const StiOptions& opt, std::uint64_t seed) {
  if (!(opt.cadence_s > 0.0) || !(opt.duration_s > 2.0 * opt.cadence_s)) {
    throw Error(ErrorKind::OutOfRange, "STI needs duration > 2 * cadence > 0");
  }
  if (!(opt.settle_s >= 0.0)) throw Error(ErrorKind::OutOfRange, "settle time must be >= 0");
  prepare(port, opt.level_w_m2, opt.feedback, seed);
  if (opt.settle_s > 0.0) port.advance(opt.settle_s);
  const int n = static_cast<int>(std::floor(opt.duration_s / opt.cadence_s + 1e-9));
  ExperimentResult r = sample(port, n, opt.cadence_s, iec::InstabilityKind::Short);
  r.feedback = opt.feedback;
  r.seed = seed;
  r.level_w_m2 = opt.level_w_m2;
  return r;
}

ExperimentResult run_lti(TestbedPort& port, const LtiOptions& opt, std::uint64_t seed) {
  if (opt.samples < 2) throw Error(ErrorKind::OutOfRange, "LTI needs at least two samples");
  if (!(opt.interval_s > 0.0)) throw Error(ErrorKind::OutOfRange, "LTI interval must be > 0");
  prepare(port, opt.level_w_m2, opt.feedback, seed);
  ExperimentResult r = sample(port, opt.samples, opt.interval_s, iec::InstabilityKind::Long);
  r.feedback = opt.feedback;
  r.seed = seed;
  r.level_w_m2 = opt.level_w_m2;
  return r;
}

void write_series_csv(std::ostream& out, const ExperimentResult& r) {
  out << "timestamp_s,value\n";
  const auto ts = r.series.timestamps();
  const auto vs = r.series.values();
  for (std::size_t i = 0; i < ts.size(); ++i) out << format_number(ts[i]) << ',' << format_number(vs[i]) << '\n';
}

std::string result_json(const ExperimentResult& r, const std::string& config_hash) {
  nlohmann::json j = {
      {"schema", 1},
      {"kind", r.kind == iec::InstabilityKind::Short ? "STI" : "LTI"},
      {"metric_percent", r.metric.percent},
      {"class", std::string(1, iec::grade_letter(r.metric.grade))},
      {"feedback", r.feedback},
      {"seed", r.seed},
      {"level_w_m2", r.level_w_m2},
      {"samples", r.series.size()},
      {"config_hash", config_hash},
  };
  return j.dump(2);
}

namespace {

PairedSti paired_one(const SystemConfig& cfg, const StiOptions& opt, std::uint64_t seed) {
  Testbed tb(cfg);
  StiOptions o = opt;
  PairedSti p;
  o.feedback = false;
  p.open_loop = run_sti(tb, o, seed);
  o.feedback = true;
  p.closed_loop = run_sti(tb, o, seed);
  return p;
}

}  // namespace

std::vector<PairedSti> paired_sti_serial(const SystemConfig& cfg, const StiOptions& opt,
                                         std::span<const std::uint64_t> seeds) {
  std::vector<PairedSti> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(paired_one(cfg, opt, s));
  return out;
}

std::vector<PairedSti> paired_sti_omp(const SystemConfig& cfg, const StiOptions& opt,
                                      std::span<const std::uint64_t> seeds) {
  std::vector<PairedSti> out(seeds.size());
  std::exception_ptr failure;
  const auto n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = paired_one(cfg, opt, seeds[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace solartb
