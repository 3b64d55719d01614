#pragma once

// Eight-type LED light board: emission shapes, 16-bit dimming and the
// calibrated duty -> irradiance response.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "solartb/spectrum.hpp"

namespace solartb {

inline constexpr std::size_t kChannelCount = 8;
inline constexpr std::uint16_t kMaxDutyCode = 65535;
/// Lowest programmable intensity (0.01 %), where irr_min is calibrated.
inline constexpr double kMinCalibratedDuty = 1e-4;
inline constexpr double kReferenceTempC = 25.0;

inline constexpr double kBoardGridFirstNm = 300.0;
inline constexpr double kBoardGridLastNm = 1200.0;
inline constexpr double kBoardGridStepNm = 1.0;

/// One bell-shaped emission component; weights are relative.
struct ShapeComponent {
  double peak_nm = 0.0;
  double fwhm_nm = 0.0;
  double weight = 1.0;

  friend bool operator==(const ShapeComponent&, const ShapeComponent&) = default;
};

enum class ResponseCurve { PowerLaw };

/// gamma = ln(irr_min / irr_max) / ln(1e-4), so irr_max * d^gamma passes
/// through both calibration points. Throws Error(InvalidEndpoints) unless
/// 0 < irr_min < irr_max.
double gamma_from_endpoints(double irr_min_w_m2, double irr_max_w_m2);

class LedChannelSpec {
 public:
  LedChannelSpec() = default;
  /// Validates endpoints, led_count > 0 and a non-empty shape with positive
  /// widths and non-negative weights.
  LedChannelSpec(std::string name, int led_count, std::vector<ShapeComponent> shape,
                 double irr_min_w_m2, double irr_max_w_m2, double temp_coeff_per_k,
                 ResponseCurve curve = ResponseCurve::PowerLaw);

  const std::string& name() const { return name_; }
  int led_count() const { return led_count_; }
  const std::vector<ShapeComponent>& shape() const { return shape_; }
  double irr_min() const { return irr_min_; }
  double irr_max() const { return irr_max_; }
  double temp_coeff_per_k() const { return temp_coeff_; }
  double gamma() const { return gamma_; }
  ResponseCurve response_curve() const { return curve_; }

  /// Normalized emission shape, nm^-1; integrates to 1 over the board grid.
  double shape_value(double wavelength_nm) const;

  /// 1 + temp_coeff * (temp_c - 25).
  double temperature_factor(double temp_c) const;

 private:
  std::string name_;
  int led_count_ = 0;
  std::vector<ShapeComponent> shape_;
  double irr_min_ = 0.0;
  double irr_max_ = 0.0;
  double temp_coeff_ = 0.0;
  double gamma_ = 1.0;
  double shape_norm_ = 1.0;
  ResponseCurve curve_ = ResponseCurve::PowerLaw;
};

/// Irradiance of one channel, W/m^2. Zero at duty 0, otherwise
/// irr_max * duty^gamma * (1 + temp_coeff * (temp_c - 25)).
/// Throws Error(DutyOutOfRange) unless duty is in [0, 1].
double channel_irradiance(const LedChannelSpec& spec, double duty, double temp_c = kReferenceTempC);

/// Inverse of channel_irradiance; the result is clamped to [0, 1].
double duty_for_irradiance(const LedChannelSpec& spec, double irradiance_w_m2,
                           double temp_c = kReferenceTempC);

class ChannelSet {
 public:
  ChannelSet() = default;
  /// Throws Error(Config) unless exactly eight channels are given.
  explicit ChannelSet(std::vector<LedChannelSpec> channels);

  const LedChannelSpec& operator[](std::size_t i) const { return channels_[i]; }
  std::size_t size() const { return channels_.size(); }
  auto begin() const { return channels_.begin(); }
  auto end() const { return channels_.end(); }

  double total_min() const;
  double total_max() const;
  int total_leds() const;

 private:
  std::vector<LedChannelSpec> channels_;
};

struct BoardState {
  std::array<std::uint16_t, kChannelCount> duty_codes{};
  double board_temp_c = kReferenceTempC;

  friend bool operator==(const BoardState&, const BoardState&) = default;
};

/// round(fraction * 65535); throws Error(OutOfRange) outside [0, 1].
std::uint16_t quantize_duty(double fraction);
inline double decode_duty(std::uint16_t code) { return static_cast<double>(code) / kMaxDutyCode; }

/// Per-channel irradiance for the given state, W/m^2.
std::array<double, kChannelCount> channel_powers(const ChannelSet& channels, const BoardState& state);

/// Sum of power_j * shape_j on the 1 nm grid [300, 1200].
Spectrum board_spectrum(const ChannelSet& channels, std::span<const double> powers_w_m2);
Spectrum board_spectrum(const ChannelSet& channels, const BoardState& state);

/// Normalized shape of one channel on the board grid (unit power).
Spectrum channel_shape_spectrum(const LedChannelSpec& spec);

/// Default eight channels with the measured calibration endpoints and LED counts.
/// Emission shapes are bell-curve approximations, not measured data.
ChannelSet default_board();

}  // namespace solartb
