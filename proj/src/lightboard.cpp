#include "solartb/lightboard.hpp"

#include <cmath>
#include <numeric>

#include "solartb/error.hpp"

namespace solartb {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

double raw_shape(const std::vector<ShapeComponent>& shape, double wl) {
  double v = 0.0;
  for (const auto& c : shape) {
    const double z = (wl - c.peak_nm) / (c.fwhm_nm * kFwhmToSigma);
    v += c.weight * std::exp(-0.5 * z * z);
  }
  return v;
}

std::size_t board_grid_size() {
  return static_cast<std::size_t>(
             std::llround((kBoardGridLastNm - kBoardGridFirstNm) / kBoardGridStepNm)) + 1;
}

double board_grid_nm(std::size_t i) {
  return kBoardGridFirstNm + kBoardGridStepNm * static_cast<double>(i);
}

}  // namespace

double gamma_from_endpoints(double irr_min_w_m2, double irr_max_w_m2) {
  if (!(irr_min_w_m2 > 0.0) || !(irr_max_w_m2 > irr_min_w_m2) || !std::isfinite(irr_max_w_m2)) {
    throw Error(ErrorKind::InvalidEndpoints, "calibration endpoints must satisfy 0 < min < max");
  }
  return std::log(irr_min_w_m2 / irr_max_w_m2) / std::log(kMinCalibratedDuty);
}

LedChannelSpec::LedChannelSpec(std::string name, int led_count, std::vector<ShapeComponent> shape,
                               double irr_min_w_m2, double irr_max_w_m2, double temp_coeff_per_k,
                               ResponseCurve curve)
    : name_(std::move(name)),
      led_count_(led_count),
      shape_(std::move(shape)),
      irr_min_(irr_min_w_m2),
      irr_max_(irr_max_w_m2),
      temp_coeff_(temp_coeff_per_k),
      gamma_(gamma_from_endpoints(irr_min_w_m2, irr_max_w_m2)),
      curve_(curve) {
  if (led_count_ <= 0) throw Error(ErrorKind::Config, name_ + ": led_count must be > 0");
  if (shape_.empty()) throw Error(ErrorKind::Config, name_ + ": emission shape is empty");
  for (const auto& c : shape_) {
    if (!(c.fwhm_nm > 0.0) || !(c.weight >= 0.0)) {
      throw Error(ErrorKind::Config, name_ + ": shape components need fwhm > 0, weight >= 0");
    }
  }
  // Trapezoid on the board grid, so board_spectrum totals are exact.
  const std::size_t n = board_grid_size();
  double sum = 0.0;
  double prev = raw_shape(shape_, board_grid_nm(0));
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = raw_shape(shape_, board_grid_nm(i));
    sum += 0.5 * (prev + cur) * kBoardGridStepNm;
    prev = cur;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::Config, name_ + ": shape has no emission on 300-1200 nm");
  shape_norm_ = sum;
}

double LedChannelSpec::shape_value(double wavelength_nm) const {
  return raw_shape(shape_, wavelength_nm) / shape_norm_;
}

double LedChannelSpec::temperature_factor(double temp_c) const {
  return 1.0 + temp_coeff_ * (temp_c - kReferenceTempC);
}

double channel_irradiance(const LedChannelSpec& spec, double duty, double temp_c) {
  if (!(duty >= 0.0 && duty <= 1.0)) {
    throw Error(ErrorKind::DutyOutOfRange, "duty must be within [0, 1]");
  }
  if (duty == 0.0) return 0.0;
  return spec.irr_max() * std::pow(duty, spec.gamma()) * spec.temperature_factor(temp_c);
}

double duty_for_irradiance(const LedChannelSpec& spec, double irradiance_w_m2, double temp_c) {
  if (!(irradiance_w_m2 > 0.0)) return 0.0;
  const double full = spec.irr_max() * spec.temperature_factor(temp_c);
  if (!(full > 0.0)) return 0.0;
  const double d = std::pow(irradiance_w_m2 / full, 1.0 / spec.gamma());
  return std::min(d, 1.0);
}

ChannelSet::ChannelSet(std::vector<LedChannelSpec> channels) : channels_(std::move(channels)) {
  if (channels_.size() != kChannelCount) {
    throw Error(ErrorKind::Config, "light board needs exactly eight channels");
  }
}

double ChannelSet::total_min() const {
  double s = 0.0;
  for (const auto& c : channels_) s += c.irr_min();
  return s;
}

double ChannelSet::total_max() const {
  double s = 0.0;
  for (const auto& c : channels_) s += c.irr_max();
  return s;
}

int ChannelSet::total_leds() const {
  int s = 0;
  for (const auto& c : channels_) s += c.led_count();
  return s;
}

std::uint16_t quantize_duty(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::OutOfRange, "duty fraction must be within [0, 1]");
  }
  return static_cast<std::uint16_t>(std::lround(fraction * kMaxDutyCode));
}

std::array<double, kChannelCount> channel_powers(const ChannelSet& channels, const BoardState& state) {
  std::array<double, kChannelCount> p{};
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    p[j] = channel_irradiance(channels[j], decode_duty(state.duty_codes[j]), state.board_temp_c);
  }
  return p;
}

Spectrum board_spectrum(const ChannelSet& channels, std::span<const double> powers_w_m2) {
  const std::size_t n = board_grid_size();
  std::vector<double> wl(n), v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) wl[i] = board_grid_nm(i);
  for (std::size_t j = 0; j < channels.size() && j < powers_w_m2.size(); ++j) {
    const double p = powers_w_m2[j];
    if (p == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) v[i] += p * channels[j].shape_value(wl[i]);
  }
  return Spectrum(std::move(wl), std::move(v));
}

Spectrum board_spectrum(const ChannelSet& channels, const BoardState& state) {
  const auto p = channel_powers(channels, state);
  return board_spectrum(channels, p);
}

Spectrum channel_shape_spectrum(const LedChannelSpec& spec) {
  return Spectrum::sampled(kBoardGridFirstNm, kBoardGridLastNm, kBoardGridStepNm,
                           [&](double wl) { return spec.shape_value(wl); });
}

ChannelSet default_board() {
  // Part, LED count, emission components, irradiance at 0.01 % (W/m^2),
  // irradiance at 100 % (W/m^2), relative drift per kelvin.
  std::vector<LedChannelSpec> ch;
  ch.emplace_back("AREM-80C0-LM000", 312, std::vector<ShapeComponent>{{740.0, 30.0, 1.0}},
                  0.2501e-3, 74.111, -0.003);
  ch.emplace_back("AREM-90C0-KL000", 648, std::vector<ShapeComponent>{{940.0, 30.0, 1.0}},
                  0.4051e-3, 143.973, -0.003);
  ch.emplace_back("NE2B757GT", 84, std::vector<ShapeComponent>{{470.0, 25.0, 1.0}},
                  0.1267e-3, 38.376, -0.001);
  ch.emplace_back("NE2G757GT", 72, std::vector<ShapeComponent>{{525.0, 30.0, 1.0}},
                  0.3906e-3, 13.927, -0.001);
  ch.emplace_back("NE2R757GT-P6", 120, std::vector<ShapeComponent>{{630.0, 20.0, 1.0}},
                  0.4309e-3, 30.351, -0.003);
  // Broadband whites: violet pump plus two wide phosphor lobes.
  ch.emplace_back("NF2L757GT-F1", 420,
                  std::vector<ShapeComponent>{{415.0, 30.0, 0.12}, {520.0, 110.0, 0.30},
                                              {690.0, 170.0, 0.58}},
                  3.0959e-3, 179.574, -0.001);
  ch.emplace_back("NF2W757GT-F1", 780,
                  std::vector<ShapeComponent>{{415.0, 30.0, 0.20}, {500.0, 100.0, 0.33},
                                              {660.0, 180.0, 0.47}},
                  0.2293e-3, 331.376, -0.001);
  ch.emplace_back("QBHP686", 528, std::vector<ShapeComponent>{{850.0, 30.0, 1.0}},
                  0.8382e-3, 97.266, -0.003);
  return ChannelSet(std::move(ch));
}

}  // namespace solartb
