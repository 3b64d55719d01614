#include "solartb/testbed.hpp"

#include <cmath>

#include "solartb/error.hpp"

namespace solartb {

Testbed::Testbed(SystemConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  preset_ = std::make_shared<const fit::Am15gPreset>(cfg_.board);
  reset();
}

void Testbed::reconfigure(SystemConfig cfg) {
  cfg.validate();
  cfg_ = std::move(cfg);
  preset_ = std::make_shared<const fit::Am15gPreset>(cfg_.board);
  reset();
}

void Testbed::reset() {
  regulator_.reset();
  chamber_ = std::make_unique<Chamber>(cfg_.board, cfg_.chamber, cfg_.seed);
  regulator_ = std::make_unique<control::Regulator>(cfg_.regulator, chamber_->channels());
  target_ = SpectralTarget::Am15g;
  irradiance_.reset();
  feedback_ = false;
  ticks_ = 0;
}

void Testbed::set_seed(std::uint64_t seed) { chamber_->reseed(seed); }

void Testbed::set_channel_percent(int n, double percent) {
  if (n < 1 || n > static_cast<int>(kChannelCount)) {
    throw Error(ErrorKind::OutOfRange, "channel must be within 1..8");
  }
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw Error(ErrorKind::OutOfRange, "channel intensity must be within [0, 100] %");
  }
  auto codes = chamber_->board_state().duty_codes;
  codes[static_cast<std::size_t>(n - 1)] = quantize_duty(percent / 100.0);
  chamber_->set_duty_codes(codes);
  irradiance_.reset();
  if (feedback_) engage();
}

double Testbed::channel_percent(int n) {
  if (n < 1 || n > static_cast<int>(kChannelCount)) {
    throw Error(ErrorKind::OutOfRange, "channel must be within 1..8");
  }
  return 100.0 * decode_duty(chamber_->board_state().duty_codes[static_cast<std::size_t>(n - 1)]);
}

void Testbed::set_target(SpectralTarget target) {
  if (target == SpectralTarget::Custom && !cfg_.custom_target) {
    throw Error(ErrorKind::Config, "no custom spectral target configured");
  }
  target_ = target;
}

void Testbed::set_irradiance(double w_m2) {
  std::array<double, kChannelCount> duties{};
  if (target_ == SpectralTarget::Am15g) {
    duties = preset_->duties(w_m2);
  } else {
    fit::FitProblem problem;
    problem.target = *cfg_.custom_target;
    problem.total_irradiance_w_m2 = w_m2;
    problem.board_temp_c = cfg_.chamber.board_temp_c;
    duties = fit::fit_duties(problem, cfg_.board).duties;
  }
  chamber_->set_duties(duties);
  irradiance_ = w_m2;
  if (feedback_) engage();
}

void Testbed::set_feedback(bool on) {
  feedback_ = on;
  if (on) {
    engage();
  } else {
    regulator_->disengage();
  }
}

void Testbed::engage() {
  const auto nominal = chamber_->nominal_powers();
  regulator_->engage(nominal, chamber_->expected_spectrometer(nominal), chamber_->board_state().board_temp_c);
}

void Testbed::apply_powers(const control::Powers& p) {
  const double temp = chamber_->board_state().board_temp_c;
  std::array<double, kChannelCount> duties{};
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    duties[j] = p[j] > 0.0 ? duty_for_irradiance(chamber_->channels()[j], p[j], temp) : 0.0;
  }
  chamber_->set_duties(duties);
}

void Testbed::tick() {
  if (!feedback_ || !regulator_->engaged()) return;
  const auto reading = chamber_->read_spectrometer();
  if (auto p = regulator_->step(reading, cfg_.chamber.sensors.spectrometer)) apply_powers(*p);
}

void Testbed::advance(double dt_s) {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw Error(ErrorKind::OutOfRange, "time step must be > 0");
  // The chamber is always stepped on the regulator grid, with or without
  // feedback, so paired runs consume identical drift draws.
  const double period = cfg_.regulator.sample_period_s;
  const double end = chamber_->now() + dt_s;
  const double eps = 1e-9 * std::max(1.0, end);
  for (;;) {
    const double next = static_cast<double>(ticks_ + 1) * period;
    if (next > end + eps) break;
    const double step = next - chamber_->now();
    if (step > 0.0) chamber_->advance(step);
    ++ticks_;
    tick();
  }
  const double rest = end - chamber_->now();
  if (rest > eps) chamber_->advance(rest);
}

SpectrometerValues Testbed::read_spectrum() { return chamber_->read_spectrometer().values; }

iec::BinFractions Testbed::read_bins() { return iec::bin_fractions(chamber_->spectrum_at_dut()); }

LuxReading Testbed::read_illuminance(LuxRange range) { return chamber_->read_lux(range); }

std::vector<double> Testbed::scan(int grid_n) { return chamber_->scan(grid_n).values_w_m2; }

}  // namespace solartb
