#pragma once

// Channel-duty solver: find the eight channel powers whose binned spectrum
// best matches a target distribution at a requested total irradiance.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <variant>

#include "solartb/iec.hpp"
#include "solartb/lightboard.hpp"

namespace solartb::fit {

using BinMatrix = Eigen::Matrix<double, 6, 8>;
using ChannelVector = Eigen::Matrix<double, 8, 1>;

/// Entry (i, j): fraction of channel j's normalized emission inside bin i.
/// Columns sum to <= 1; emission outside 400-1100 nm is not counted.
BinMatrix channel_bin_matrix(const ChannelSet& channels);

struct DutyBounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct FitProblem {
  std::variant<iec::BinFractions, Spectrum> target;
  double total_irradiance_w_m2 = 0.0;
  std::array<DutyBounds, kChannelCount> bounds{};
  /// Per-bin weights; default is 1 / (0.25 * target fraction), the inverse
  /// of the class-A half-width expressed in fraction units.
  std::optional<std::array<double, iec::kBinCount>> weights;
  double board_temp_c = kReferenceTempC;
};

struct FitOptions {
  int max_iterations = 5000;
  double step_tolerance = 1e-10;
  /// Called with (iteration, objective) after every accepted step.
  std::function<void(int, double)> observer;
};

struct FitResult {
  std::array<double, kChannelCount> duties{};
  std::array<double, kChannelCount> powers_w_m2{};
  /// Recomputed from `duties` through the board model and bin integration.
  iec::BinFractions achieved_fractions;
  std::array<double, iec::kBinCount> ratios{};
  iec::Grade achieved_class = iec::Grade::Fail;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Throws Error(Unachievable) if the total lies outside
/// [sum irr_min, sum irr_max]. Spectral mismatch is never an error: the
/// achieved class is reported as-is.
FitResult fit_duties(const FitProblem& problem, const ChannelSet& channels,
                     const FitOptions& options = {});

/// Euclidean projection onto { lo <= x <= hi, sum(x) = total }.
ChannelVector project_capped_simplex(const ChannelVector& x, const ChannelVector& lo,
                                     const ChannelVector& hi, double total);

/// The six irradiance levels (W/m^2) at which AM1.5G presets are cached.
inline constexpr std::array<double, 6> kPresetLevels{1.0, 10.0, 50.0, 300.0, 500.0, 750.0};

/// AM1.5G duty presets. Cached fits at kPresetLevels; levels between two
/// cached levels are interpolated geometrically in duty (refitted if the
/// mix falls out of class A), other achievable levels are fitted directly.
class Am15gPreset {
 public:
  explicit Am15gPreset(ChannelSet channels);

  /// Throws Error(Unachievable) outside [sum irr_min, sum irr_max].
  std::array<double, kChannelCount> duties(double level_w_m2) const;
  const FitResult& cached(std::size_t level_index) const { return cache_[level_index]; }
  const ChannelSet& channels() const { return channels_; }

 private:
  ChannelSet channels_;
  std::array<FitResult, kPresetLevels.size()> cache_;
};

}  // namespace solartb::fit
