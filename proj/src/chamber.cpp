#include "solartb/chamber.hpp"

#include <algorithm>
#include <cmath>

#include "solartb/error.hpp"
#include "solartb/photometry.hpp"

namespace solartb {

void DriftModel::validate() const {
  if (!(warmup_amplitude >= 0.0 && warmup_amplitude < 1.0)) {
    throw Error(ErrorKind::Config, "drift warmup_amplitude must be within [0, 1)");
  }
  if (!(warmup_tau_s >= 0.0) || !(random_walk_sigma_per_sqrt_h >= 0.0) || !(aging_slope_per_kh >= 0.0) ||
      !(fluctuation_sigma >= 0.0) || !(fluctuation_tau_s > 0.0)) {
    throw Error(ErrorKind::Config, "drift parameters must be >= 0 (fluctuation_tau_s > 0)");
  }
}

void VirtualClock::set_scale(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw Error(ErrorKind::OutOfRange, "time scale must be > 0");
  scale_ = factor;
}

void VirtualClock::advance(double dt_s) {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw Error(ErrorKind::OutOfRange, "time step must be > 0");
  now_s_ += dt_s;
}

void ChamberConfig::validate() const {
  geometry.validate();
  drift.validate();
  dut.validate();
  sensors.validate();
  if (!(peltier_tau_s > 0.0)) throw Error(ErrorKind::Config, "peltier_tau_s must be > 0");
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Chamber::Chamber(ChannelSet channels, ChamberConfig config, std::uint64_t seed)
    : channels_(std::move(channels)), config_(std::move(config)), field_(config_.geometry) {
  config_.validate();
  board_.board_temp_c = config_.board_temp_c;
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    const Spectrum shape = channel_shape_spectrum(channels_[j]);
    spectro_resp_[j] = spectrometer_response(shape, config_.sensors.spectrometer);
    isc_resp_[j] = dut_isc(shape, config_.dut, kReferenceTempC);
    lux_resp_[j] = lux_from_spectrum(shape);
  }
  sensor_rel_ = field_.relative_at(config_.sensor_x_mm, config_.sensor_y_mm);
  dut_rel_ = field_.relative_at(dut_x_mm_, dut_y_mm_);
  reseed(seed);
}

void Chamber::reseed(std::uint64_t seed) {
  seed_ = seed;
  std::uint64_t s = seed;
  drift_rng_.seed(splitmix64(s));
  spectro_rng_.seed(splitmix64(s));
  lux_rng_.seed(splitmix64(s));
  smu_rng_.seed(splitmix64(s));
  temp_rng_.seed(splitmix64(s));
}

bool Chamber::lit() const {
  if (door_ == DoorState::Open) return false;
  return std::any_of(board_.duty_codes.begin(), board_.duty_codes.end(), [](auto c) { return c > 0; });
}

void Chamber::update_lit_transition(bool was_lit) {
  if (!was_lit && lit()) lit_since_s_ = clock_.now();
}

void Chamber::set_duty_codes(const std::array<std::uint16_t, kChannelCount>& codes) {
  const bool was = lit();
  board_.duty_codes = codes;
  update_lit_transition(was);
}

void Chamber::set_duties(const std::array<double, kChannelCount>& fractions) {
  std::array<std::uint16_t, kChannelCount> codes{};
  for (std::size_t j = 0; j < kChannelCount; ++j) codes[j] = quantize_duty(fractions[j]);
  set_duty_codes(codes);
}

void Chamber::set_door(DoorState state) {
  const bool was = lit();
  door_ = state;
  update_lit_transition(was);
}

void Chamber::advance(double dt_s) {
  clock_.advance(dt_s);
  if (lit()) lit_seconds_ += dt_s;

  // Both draws happen on every step so the stream position depends only on
  // the sequence of steps, not on parameter values.
  std::normal_distribution<double> n(0.0, 1.0);
  const double z_walk = n(drift_rng_);
  const double z_fluct = n(drift_rng_);
  const auto& d = config_.drift;
  walk_ += d.random_walk_sigma_per_sqrt_h * std::sqrt(dt_s / 3600.0) * z_walk;
  const double rho = std::exp(-dt_s / d.fluctuation_tau_s);
  fluct_ = rho * fluct_ + d.fluctuation_sigma * std::sqrt(1.0 - rho * rho) * z_fluct;

  dut_temp_c_ = dut_setpoint_c_ + (dut_temp_c_ - dut_setpoint_c_) * std::exp(-dt_s / config_.peltier_tau_s);
}

void Chamber::set_dut_temperature(double target_c) {
  if (!(target_c >= kDutTempMinC && target_c <= kDutTempMaxC)) {
    throw Error(ErrorKind::TargetOutOfRange, "DUT temperature target must be within [0, 80] C");
  }
  dut_setpoint_c_ = target_c;
}

void Chamber::set_dut_position(double x_mm, double y_mm) {
  const double half = 0.5 * config_.geometry.test_area_mm;
  if (!(std::abs(x_mm) <= half && std::abs(y_mm) <= half)) {
    throw Error(ErrorKind::OutOfRange, "DUT position must lie inside the test area");
  }
  dut_x_mm_ = x_mm;
  dut_y_mm_ = y_mm;
  dut_rel_ = field_.relative_at(x_mm, y_mm);
}

double Chamber::drift_factor() const {
  const auto& d = config_.drift;
  const double t_lit = clock_.now() - lit_since_s_;
  const double warm = d.warmup_tau_s > 0.0 ? 1.0 - d.warmup_amplitude * std::exp(-t_lit / d.warmup_tau_s) : 1.0;
  const double aging = 1.0 - d.aging_slope_per_kh * (lit_seconds_ / 3600.0) / 1000.0;
  return std::max(0.0, warm * (1.0 + walk_) * aging * (1.0 + fluct_));
}

std::array<double, kChannelCount> Chamber::nominal_powers() const { return channel_powers(channels_, board_); }

std::array<double, kChannelCount> Chamber::effective_powers() const {
  std::array<double, kChannelCount> p{};
  if (door_ == DoorState::Open) return p;
  p = nominal_powers();
  const double f = drift_factor();
  for (double& v : p) v *= f;
  return p;
}

Spectrum Chamber::spectrum_at_dut() const {
  auto p = effective_powers();
  for (double& v : p) v *= dut_rel_;
  return board_spectrum(channels_, p);
}

Spectrum Chamber::spectrum_at_sensor() const {
  auto p = effective_powers();
  for (double& v : p) v *= sensor_rel_;
  return board_spectrum(channels_, p);
}

SpectrometerValues Chamber::expected_spectrometer(const std::array<double, kChannelCount>& powers) const {
  SpectrometerValues out{};
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    const double p = powers[j] * sensor_rel_;
    if (p == 0.0) continue;
    for (std::size_t i = 0; i < kSpectrometerChannels; ++i) out[i] += p * spectro_resp_[j][i];
  }
  return out;
}

SpectrometerReading Chamber::read_spectrometer() {
  SpectrometerReading r;
  r.values = expected_spectrometer(effective_powers());
  const auto& spec = config_.sensors.spectrometer;
  apply_relative_noise(r.values, spec.noise_sigma, spectro_rng_());
  r.saturated = std::any_of(r.values.begin(), r.values.end(),
                            [&](double v) { return v > spec.saturation_w_m2_nm; });
  return r;
}

LuxReading Chamber::read_lux(LuxRange range) {
  const auto p = effective_powers();
  double lux = 0.0;
  for (std::size_t j = 0; j < kChannelCount; ++j) lux += p[j] * sensor_rel_ * lux_resp_[j];
  return lux_classify(lux, config_.sensors.lux(range), lux_rng_());
}

double Chamber::dut_current_expected() const {
  const auto p = effective_powers();
  double isc = 0.0;
  for (std::size_t j = 0; j < kChannelCount; ++j) isc += p[j] * dut_rel_ * isc_resp_[j];
  return isc * (1.0 + config_.dut.isc_temp_coeff_per_k * (dut_temp_c_ - kReferenceTempC));
}

double Chamber::read_dut_current() {
  double v = dut_current_expected();
  apply_relative_noise(std::span<double>(&v, 1), config_.sensors.smu_noise_sigma, smu_rng_());
  return v;
}

double Chamber::read_dut_temperature() {
  std::normal_distribution<double> n(0.0, 1.0);
  return dut_temp_c_ + config_.sensors.temp_noise_sigma_c * n(temp_rng_);
}

IrradianceField Chamber::scan(int grid_n) const {
  const auto p = effective_powers();
  double total = 0.0;
  for (double v : p) total += v;
  return field_.field(total, grid_n);
}

}  // namespace solartb
