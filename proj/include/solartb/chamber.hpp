#pragma once

// The illumination chamber as a single-writer state machine: light board
// state, door interlock, virtual time, drift, DUT stage temperature and all
// sensor readouts.

#include <array>
#include <cstdint>
#include <random>

#include "solartb/field.hpp"
#include "solartb/lightboard.hpp"
#include "solartb/sensors.hpp"

namespace solartb {

/// Multiplicative output drift of the whole board (spectrally neutral).
///
/// factor = (1 - a exp(-t_lit / tau)) * (1 + walk) * (1 - aging * h_lit / 1000)
///          * (1 + fluct)
/// `walk` is a Gaussian random walk, `fluct` an Ornstein-Uhlenbeck process
/// modelling short-term thermal fluctuation of the drivers.
struct DriftModel {
  double warmup_amplitude = 0.038;
  double warmup_tau_s = 600.0;
  double random_walk_sigma_per_sqrt_h = 0.0015;
  double aging_slope_per_kh = 0.002;
  double fluctuation_sigma = 0.0009;
  double fluctuation_tau_s = 2.0;

  void validate() const;
  static DriftModel none() { return {0.0, 600.0, 0.0, 0.0, 0.0, 2.0}; }
};

class VirtualClock {
 public:
  double now() const { return now_s_; }
  double scale() const { return scale_; }
  /// Throws Error(OutOfRange) unless factor > 0.
  void set_scale(double factor);
  /// Throws Error(OutOfRange) unless dt > 0.
  void advance(double dt_s);
  void reset() { now_s_ = 0.0; }

 private:
  double now_s_ = 0.0;
  double scale_ = 1.0;
};

enum class DoorState { Closed, Open };

struct ChamberConfig {
  ChamberGeometry geometry;
  DriftModel drift;
  DutCell dut;
  SensorSuite sensors;
  double peltier_tau_s = 30.0;
  double board_temp_c = kReferenceTempC;
  /// Where the spectrometer and lux sensors sit on the carrier, mm.
  double sensor_x_mm = 0.0;
  double sensor_y_mm = 0.0;

  void validate() const;
};

inline constexpr double kDutTempMinC = 0.0;
inline constexpr double kDutTempMaxC = 80.0;

/// SplitMix64 step; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

class Chamber {
 public:
  Chamber(ChannelSet channels, ChamberConfig config, std::uint64_t seed);

  const ChannelSet& channels() const { return channels_; }
  const ChamberConfig& config() const { return config_; }
  const FieldModel& field_model() const { return field_; }

  /// Restart all random streams; the physical state is kept.
  void reseed(std::uint64_t seed);
  std::uint64_t seed() const { return seed_; }

  void set_duty_codes(const std::array<std::uint16_t, kChannelCount>& codes);
  void set_duties(const std::array<double, kChannelCount>& fractions);
  const BoardState& board_state() const { return board_; }

  void set_door(DoorState state);
  DoorState door() const { return door_; }
  bool lit() const;

  void advance(double dt_s);
  double now() const { return clock_.now(); }
  VirtualClock& clock() { return clock_; }
  const VirtualClock& clock() const { return clock_; }

  /// Throws Error(TargetOutOfRange) outside [0, 80] C.
  void set_dut_temperature(double target_c);
  double dut_setpoint() const { return dut_setpoint_c_; }
  double dut_temperature() const { return dut_temp_c_; }

  /// Throws Error(OutOfRange) if the point is outside the test area.
  void set_dut_position(double x_mm, double y_mm);
  double dut_x_mm() const { return dut_x_mm_; }
  double dut_y_mm() const { return dut_y_mm_; }

  double drift_factor() const;
  /// Channel irradiances set by the duty codes, before drift and interlock.
  std::array<double, kChannelCount> nominal_powers() const;
  /// Channel irradiances actually emitted (drift applied, zero if open).
  std::array<double, kChannelCount> effective_powers() const;

  Spectrum spectrum_at_dut() const;
  Spectrum spectrum_at_sensor() const;

  /// Noise-free spectrometer response for given emitted channel powers.
  SpectrometerValues expected_spectrometer(const std::array<double, kChannelCount>& powers) const;

  SpectrometerReading read_spectrometer();
  LuxReading read_lux(LuxRange range);
  double read_dut_current();
  double read_dut_temperature();

  /// Noise-free Isc at the current DUT position.
  double dut_current_expected() const;

  /// Instantaneous total-irradiance field on the DUT plane.
  IrradianceField scan(int grid_n) const;

 private:
  void update_lit_transition(bool was_lit);

  ChannelSet channels_;
  ChamberConfig config_;
  FieldModel field_;
  std::uint64_t seed_ = 0;

  BoardState board_{};
  DoorState door_ = DoorState::Closed;
  VirtualClock clock_;

  double dut_setpoint_c_ = kReferenceTempC;
  double dut_temp_c_ = kReferenceTempC;
  double dut_x_mm_ = 0.0;
  double dut_y_mm_ = 0.0;
  double dut_rel_ = 1.0;
  double sensor_rel_ = 1.0;

  double lit_since_s_ = 0.0;
  double lit_seconds_ = 0.0;
  double walk_ = 0.0;
  double fluct_ = 0.0;

  // Per-channel linear responses at unit power, field factor 1, 25 C.
  std::array<SpectrometerValues, kChannelCount> spectro_resp_{};
  std::array<double, kChannelCount> isc_resp_{};
  std::array<double, kChannelCount> lux_resp_{};

  std::mt19937_64 drift_rng_;
  std::mt19937_64 spectro_rng_;
  std::mt19937_64 lux_rng_;
  std::mt19937_64 smu_rng_;
  std::mt19937_64 temp_rng_;
};

}  // namespace solartb
