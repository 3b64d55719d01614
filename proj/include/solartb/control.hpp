#pragma once

// Closed-loop irradiance regulation from the onboard spectrometer.

#include <array>
#include <optional>

#include "solartb/fit.hpp"
#include "solartb/sensors.hpp"

namespace solartb::control {

enum class RegulatorMode { Total, PerBin };

struct RegulatorConfig {
  /// Integral gain, relative correction per relative error per second.
  double ki = 0.02;
  double sample_period_s = 1.0;
  RegulatorMode mode = RegulatorMode::Total;
  bool anti_windup = true;

  /// Throws Error(Config) unless ki > 0 and sample_period_s > 0.
  void validate() const;
};

/// One integral update of the common output scale:
/// scale + ki * T * (setpoint - sensed) / setpoint.
/// Throws Error(OutOfRange) unless setpoint > 0 and sensed > 0.
double regulate_total(double setpoint, double sensed, double scale, const RegulatorConfig& cfg);

using Powers = std::array<double, kChannelCount>;

/// Channel powers whose sum is `scale` * sum(nominal). Channels are scaled
/// together; any that would exceed `max` are pinned there and the others
/// take up the difference. Empty if no such split exists.
std::optional<Powers> distribute_scale(const Powers& nominal, const Powers& max, double scale);

/// Spectrometer channel -> IEC bin index, by channel centre.
std::array<double, iec::kBinCount> group_by_bin(const SpectrometerValues& values,
                                                const SpectrometerSpec& spec);

class Regulator {
 public:
  Regulator(RegulatorConfig cfg, const ChannelSet& channels);

  const RegulatorConfig& config() const { return cfg_; }

  /// Latch the operating point: nominal channel powers and the noise-free
  /// spectrometer reading they produce. Resets the integrator.
  void engage(const Powers& nominal, const SpectrometerValues& setpoint, double board_temp_c);
  void disengage() { engaged_ = false; }
  bool engaged() const { return engaged_; }

  /// One sample period. Returns the new channel powers, or nothing when the
  /// output is held (saturated sensor, rejected step, not engaged).
  std::optional<Powers> step(const SpectrometerReading& reading, const SpectrometerSpec& spec);

  double scale() const { return scale_; }
  const Powers& powers() const { return powers_; }
  int held_steps() const { return held_; }

 private:
  RegulatorConfig cfg_;
  const ChannelSet* channels_;
  Eigen::Matrix<double, 8, 6> pinv_;
  bool engaged_ = false;
  Powers nominal_{};
  Powers max_{};
  Powers powers_{};
  Powers integral_{};
  SpectrometerValues setpoint_{};
  std::array<double, iec::kBinCount> bin_power_{};
  double setpoint_total_ = 0.0;
  double scale_ = 1.0;
  int held_ = 0;
};

}  // namespace solartb::control
