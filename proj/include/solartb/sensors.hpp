#pragma once

// Sensor-board and DUT readout models: 18-channel spectrometer, two ambient
// light sensors with complementary ranges, and the DUT short-circuit current.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "solartb/spectrum.hpp"

namespace solartb {

struct DutCell {
  double area_m2 = 1.84e-4;
  /// (wavelength nm, A/W), strictly increasing wavelengths, linear in between
  /// and zero outside.
  std::vector<std::pair<double, double>> responsivity{
      {300.0, 0.0}, {400.0, 0.45}, {1100.0, 0.45}, {1150.0, 0.0}};
  double isc_temp_coeff_per_k = 0.0005;

  /// Throws Error(Config).
  void validate() const;
  double responsivity_at(double wavelength_nm) const;
};

/// area * integral(E * SR) * (1 + k (T - 25)), in amperes.
double dut_isc(const Spectrum& spectrum_at_dut, const DutCell& cell, double temp_c);

inline constexpr std::size_t kSpectrometerChannels = 18;
using SpectrometerValues = std::array<double, kSpectrometerChannels>;

struct SpectrometerSpec {
  SpectrometerValues centers_nm{410, 435, 460, 485, 510, 535, 560, 585, 610,
                                645, 680, 705, 730, 760, 810, 860, 900, 940};
  SpectrometerValues fwhm_nm{20, 20, 20, 20, 20, 20, 20, 20, 20,
                             20, 20, 20, 20, 20, 20, 20, 20, 20};
  /// Relative, per channel.
  double noise_sigma = 0.004;
  /// Channel reading (W/m^2/nm) above which the device reports saturation.
  double saturation_w_m2_nm = 8.0;
};

/// Normalized Gaussian passband of one channel, truncated at +-1.5 FWHM.
double spectrometer_kernel(const SpectrometerSpec& spec, std::size_t channel, double wavelength_nm);

struct SpectrometerReading {
  SpectrometerValues values{};
  bool saturated = false;
  double total() const;
};

/// Noise-free channel responses in W/m^2/nm.
SpectrometerValues spectrometer_response(const Spectrum& s, const SpectrometerSpec& spec);

/// Response times multiplicative N(1, sigma) noise; same seed, same output.
SpectrometerReading spectrometer_read(const Spectrum& s, const SpectrometerSpec& spec,
                                      std::uint64_t rng_seed);

enum class LuxStatus { Ok, Saturated, BelowFloor };
enum class LuxRange { Low, High };

struct LuxSensorSpec {
  double min_lx = 0.01;
  double max_lx = 83000.0;
  double noise_sigma = 0.002;
};

struct LuxReading {
  LuxStatus status = LuxStatus::Ok;
  double lux = 0.0;
};

LuxReading lux_read(const Spectrum& s, const LuxSensorSpec& sensor, std::uint64_t rng_seed);

/// Classify an illuminance value against a sensor range after noise.
LuxReading lux_classify(double lux_value, const LuxSensorSpec& sensor, std::uint64_t rng_seed);

struct SensorSuite {
  SpectrometerSpec spectrometer;
  LuxSensorSpec lux_low{0.01, 83000.0, 0.002};
  LuxSensorSpec lux_high{1.0, 228000.0, 0.002};
  /// Relative noise of the source-measure unit reading the DUT current.
  double smu_noise_sigma = 1e-4;
  double temp_noise_sigma_c = 0.01;

  void validate() const;
  const LuxSensorSpec& lux(LuxRange r) const { return r == LuxRange::Low ? lux_low : lux_high; }
};

/// Multiply each value by (1 + sigma * N(0, 1)), floored at zero.
void apply_relative_noise(std::span<double> values, double sigma, std::uint64_t rng_seed);

}  // namespace solartb
