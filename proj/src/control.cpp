#include "solartb/control.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "solartb/error.hpp"

namespace solartb::control {

void RegulatorConfig::validate() const {
  if (!(ki > 0.0)) throw Error(ErrorKind::Config, "regulator ki must be > 0");
  if (!(sample_period_s > 0.0)) throw Error(ErrorKind::Config, "regulator sample_period_s must be > 0");
}

double regulate_total(double setpoint, double sensed, double scale, const RegulatorConfig& cfg) {
  if (!(setpoint > 0.0) || !(sensed > 0.0)) {
    throw Error(ErrorKind::OutOfRange, "setpoint and sensed value must be > 0");
  }
  return scale + cfg.ki * cfg.sample_period_s * (setpoint - sensed) / setpoint;
}

std::optional<Powers> distribute_scale(const Powers& nominal, const Powers& max, double scale) {
  if (!(scale >= 0.0)) return std::nullopt;
  const double target = scale * std::accumulate(nominal.begin(), nominal.end(), 0.0);
  double capacity = 0.0;
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    if (nominal[j] > 0.0) capacity += max[j];
  }
  if (target > capacity * (1.0 + 1e-12)) return std::nullopt;

  // sum_j min(s * nominal_j, max_j) is increasing and piecewise linear in s;
  // walk the breakpoints s_j = max_j / nominal_j in order.
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    if (nominal[j] > 0.0) order.push_back(j);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return max[a] / nominal[a] < max[b] / nominal[b]; });
  double pinned = 0.0;
  double free_nominal = 0.0;
  for (std::size_t j : order) free_nominal += nominal[j];
  for (std::size_t j : order) {
    const double bp = max[j] / nominal[j];
    if (free_nominal > 0.0 && (target - pinned) / free_nominal <= bp) break;
    pinned += max[j];
    free_nominal -= nominal[j];
  }
  const double s = free_nominal > 0.0 ? (target - pinned) / free_nominal : 0.0;

  Powers out{};
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    out[j] = nominal[j] > 0.0 ? std::min(s * nominal[j], max[j]) : 0.0;
  }
  return out;
}

std::array<double, iec::kBinCount> group_by_bin(const SpectrometerValues& values,
                                                const SpectrometerSpec& spec) {
  std::array<double, iec::kBinCount> out{};
  for (std::size_t i = 0; i < kSpectrometerChannels; ++i) {
    const double c = spec.centers_nm[i];
    for (std::size_t b = 0; b < iec::kBinCount; ++b) {
      const bool last = b + 1 == iec::kBinCount;
      if (c >= iec::kBins[b].lo_nm && (c < iec::kBins[b].hi_nm || (last && c <= iec::kBins[b].hi_nm))) {
        out[b] += values[i];
        break;
      }
    }
  }
  return out;
}

Regulator::Regulator(RegulatorConfig cfg, const ChannelSet& channels) : cfg_(cfg), channels_(&channels) {
  cfg_.validate();
  const fit::BinMatrix m = fit::channel_bin_matrix(channels);
  pinv_ = m.completeOrthogonalDecomposition().pseudoInverse();
}

void Regulator::engage(const Powers& nominal, const SpectrometerValues& setpoint, double board_temp_c) {
  nominal_ = nominal;
  powers_ = nominal;
  integral_ = nominal;
  setpoint_ = setpoint;
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    max_[j] = channel_irradiance((*channels_)[j], 1.0, board_temp_c);
  }
  setpoint_total_ = std::accumulate(setpoint.begin(), setpoint.end(), 0.0);

  const fit::BinMatrix m = fit::channel_bin_matrix(*channels_);
  fit::ChannelVector p;
  for (std::size_t j = 0; j < kChannelCount; ++j) p(static_cast<Eigen::Index>(j)) = nominal[j];
  const Eigen::Matrix<double, 6, 1> b = m * p;
  for (std::size_t i = 0; i < iec::kBinCount; ++i) bin_power_[i] = b(static_cast<Eigen::Index>(i));

  scale_ = 1.0;
  held_ = 0;
  engaged_ = setpoint_total_ > 0.0;
}

std::optional<Powers> Regulator::step(const SpectrometerReading& reading, const SpectrometerSpec& spec) {
  if (!engaged_) return std::nullopt;
  if (reading.saturated || !(reading.total() > 0.0)) {
    ++held_;
    return std::nullopt;
  }

  if (cfg_.mode == RegulatorMode::Total) {
    const double next = regulate_total(setpoint_total_, reading.total(), scale_, cfg_);
    if (auto p = distribute_scale(nominal_, max_, next)) {
      scale_ = next;
      powers_ = *p;
      return powers_;
    }
    if (cfg_.anti_windup) {
      ++held_;
      return std::nullopt;
    }
    scale_ = next;
    for (std::size_t j = 0; j < kChannelCount; ++j) {
      powers_[j] = nominal_[j] > 0.0 ? std::clamp(next * nominal_[j], 0.0, max_[j]) : 0.0;
    }
    return powers_;
  }

  // Per-bin: relative error in each bin, mapped back to channel power
  // through the pseudo-inverse of the channel bin matrix.
  const auto sp = group_by_bin(setpoint_, spec);
  const auto sensed = group_by_bin(reading.values, spec);
  Eigen::Matrix<double, 6, 1> e;
  for (std::size_t i = 0; i < iec::kBinCount; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    e(ii) = sp[i] > 0.0 ? bin_power_[i] * (sp[i] - sensed[i]) / sp[i] : 0.0;
  }
  const fit::ChannelVector dp = cfg_.ki * cfg_.sample_period_s * (pinv_ * e);
  bool clamped = false;
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    const double v = integral_[j] + dp(static_cast<Eigen::Index>(j));
    powers_[j] = std::clamp(v, 0.0, max_[j]);
    clamped = clamped || powers_[j] != v;
    // With anti-windup the integrator is the clamped vector and cannot run
    // past a limit.
    integral_[j] = cfg_.anti_windup ? powers_[j] : v;
  }
  if (clamped) ++held_;
  return powers_;
}

}  // namespace solartb::control
