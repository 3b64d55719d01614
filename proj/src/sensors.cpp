#include "solartb/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "solartb/error.hpp"
#include "solartb/photometry.hpp"

namespace solartb {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953;
constexpr double kKernelHalfWidthFwhm = 1.5;

}  // namespace

void DutCell::validate() const {
  if (!(area_m2 > 0.0)) throw Error(ErrorKind::Config, "dut area must be > 0");
  if (responsivity.size() < 2) throw Error(ErrorKind::Config, "dut responsivity needs >= 2 points");
  for (std::size_t i = 0; i < responsivity.size(); ++i) {
    if (!(responsivity[i].second >= 0.0)) {
      throw Error(ErrorKind::Config, "dut responsivity must be >= 0");
    }
    if (i > 0 && !(responsivity[i].first > responsivity[i - 1].first)) {
      throw Error(ErrorKind::Config, "dut responsivity wavelengths must increase");
    }
  }
  if (responsivity.front().first > 400.0 || responsivity.back().first < 1100.0) {
    throw Error(ErrorKind::Config, "dut responsivity must span 400-1100 nm");
  }
}

double DutCell::responsivity_at(double wl) const {
  if (responsivity.empty() || wl < responsivity.front().first || wl > responsivity.back().first) {
    return 0.0;
  }
  auto it = std::lower_bound(responsivity.begin(), responsivity.end(), wl,
                             [](const auto& p, double v) { return p.first < v; });
  if (it->first == wl) return it->second;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  return lo.second + (hi.second - lo.second) * (wl - lo.first) / (hi.first - lo.first);
}

double dut_isc(const Spectrum& spectrum_at_dut, const DutCell& cell, double temp_c) {
  const double j = spectrum_at_dut.weighted_integral([&](double wl) { return cell.responsivity_at(wl); });
  return cell.area_m2 * j * (1.0 + cell.isc_temp_coeff_per_k * (temp_c - 25.0));
}

double spectrometer_kernel(const SpectrometerSpec& spec, std::size_t channel, double wl) {
  const double sigma = spec.fwhm_nm[channel] * kFwhmToSigma;
  const double dx = wl - spec.centers_nm[channel];
  const double half = kKernelHalfWidthFwhm * spec.fwhm_nm[channel];
  if (std::abs(dx) > half) return 0.0;
  const double area = sigma * std::sqrt(2.0 * std::numbers::pi) * std::erf(half / (sigma * std::sqrt(2.0)));
  return std::exp(-0.5 * (dx / sigma) * (dx / sigma)) / area;
}

double SpectrometerReading::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

SpectrometerValues spectrometer_response(const Spectrum& s, const SpectrometerSpec& spec) {
  SpectrometerValues out{};
  for (std::size_t i = 0; i < kSpectrometerChannels; ++i) {
    out[i] = s.weighted_integral([&](double wl) { return spectrometer_kernel(spec, i, wl); });
  }
  return out;
}

void apply_relative_noise(std::span<double> values, double sigma, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : values) {
    const double z = n(rng);
    v = std::max(0.0, v * (1.0 + sigma * z));
  }
}

SpectrometerReading spectrometer_read(const Spectrum& s, const SpectrometerSpec& spec,
                                      std::uint64_t rng_seed) {
  SpectrometerReading r;
  r.values = spectrometer_response(s, spec);
  apply_relative_noise(r.values, spec.noise_sigma, rng_seed);
  r.saturated = std::any_of(r.values.begin(), r.values.end(),
                            [&](double v) { return v > spec.saturation_w_m2_nm; });
  return r;
}

LuxReading lux_classify(double lux_value, const LuxSensorSpec& sensor, std::uint64_t rng_seed) {
  double v = lux_value;
  apply_relative_noise(std::span<double>(&v, 1), sensor.noise_sigma, rng_seed);
  LuxReading r{LuxStatus::Ok, v};
  if (v > sensor.max_lx) {
    r.status = LuxStatus::Saturated;
  } else if (v < sensor.min_lx) {
    r.status = LuxStatus::BelowFloor;
  }
  return r;
}

LuxReading lux_read(const Spectrum& s, const LuxSensorSpec& sensor, std::uint64_t rng_seed) {
  return lux_classify(lux_from_spectrum(s), sensor, rng_seed);
}

void SensorSuite::validate() const {
  const auto& sp = spectrometer;
  for (std::size_t i = 0; i < kSpectrometerChannels; ++i) {
    if (!(sp.fwhm_nm[i] > 0.0)) throw Error(ErrorKind::Config, "spectrometer fwhm must be > 0");
  }
  if (!(sp.noise_sigma >= 0.0) || !(smu_noise_sigma >= 0.0) || !(temp_noise_sigma_c >= 0.0) ||
      !(lux_low.noise_sigma >= 0.0) || !(lux_high.noise_sigma >= 0.0)) {
    throw Error(ErrorKind::Config, "sensor noise must be >= 0");
  }
  if (!(sp.saturation_w_m2_nm > 0.0)) throw Error(ErrorKind::Config, "spectrometer saturation must be > 0");
  for (const auto* l : {&lux_low, &lux_high}) {
    if (!(l->min_lx >= 0.0 && l->max_lx > l->min_lx)) {
      throw Error(ErrorKind::Config, "lux sensor range must satisfy 0 <= min < max");
    }
  }
}

}  // namespace solartb
