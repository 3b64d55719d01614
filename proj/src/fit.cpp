#include "solartb/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "solartb/error.hpp"

namespace solartb::fit {

BinMatrix channel_bin_matrix(const ChannelSet& channels) {
  BinMatrix m = BinMatrix::Zero();
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    const Spectrum shape = channel_shape_spectrum(channels[j]);
    for (std::size_t i = 0; i < iec::kBinCount; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          shape.integrate(iec::kBins[i].lo_nm, iec::kBins[i].hi_nm);
    }
  }
  return m;
}

ChannelVector project_capped_simplex(const ChannelVector& x, const ChannelVector& lo,
                                     const ChannelVector& hi, double total) {
  // S(tau) = sum clamp(x - tau, lo, hi) is piecewise linear and
  // non-increasing; locate the segment containing `total` exactly.
  auto level = [&](double tau) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) s += std::clamp(x(j) - tau, lo(j), hi(j));
    return s;
  };
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(2 * x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    knots.push_back(x(j) - hi(j));
    knots.push_back(x(j) - lo(j));
  }
  std::sort(knots.begin(), knots.end());

  double tau = knots.front();
  if (level(knots.front()) <= total) {
    tau = knots.front();
  } else if (level(knots.back()) >= total) {
    tau = knots.back();
  } else {
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double s0 = level(knots[k]);
      const double s1 = level(knots[k + 1]);
      if (s0 >= total && s1 <= total) {
        tau = s0 > s1 ? knots[k] + (s0 - total) * (knots[k + 1] - knots[k]) / (s0 - s1) : knots[k];
        break;
      }
    }
  }
  ChannelVector out;
  for (Eigen::Index j = 0; j < x.size(); ++j) out(j) = std::clamp(x(j) - tau, lo(j), hi(j));
  return out;
}

namespace {

iec::BinFractions target_fractions(const FitProblem& problem) {
  if (const auto* f = std::get_if<iec::BinFractions>(&problem.target)) return *f;
  return iec::bin_fractions(std::get<Spectrum>(problem.target));
}

}  // namespace

FitResult fit_duties(const FitProblem& problem, const ChannelSet& channels, const FitOptions& options) {
  const double total = problem.total_irradiance_w_m2;
  if (!(total >= channels.total_min() && total <= channels.total_max())) {
    throw Error(ErrorKind::Unachievable,
                "requested total is outside the achievable range [" +
                    std::to_string(channels.total_min()) + ", " +
                    std::to_string(channels.total_max()) + "] W/m^2");
  }

  const iec::BinFractions target = target_fractions(problem);
  const double target_sum = target.sum();
  if (!(target_sum > 0.0)) throw Error(ErrorKind::OutOfRange, "target fractions are all zero");

  Eigen::Matrix<double, 6, 1> t_hat;
  Eigen::Matrix<double, 6, 1> w;
  for (std::size_t i = 0; i < iec::kBinCount; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    t_hat(ii) = target[i] / target_sum;
    w(ii) = problem.weights ? (*problem.weights)[i] : 1.0 / (0.25 * std::max(t_hat(ii), 1e-3));
  }

  // Residual of fractions against the target, linear in channel power:
  // (I - t 1^T) M x, weighted per bin. Variables are x = p / total.
  const BinMatrix m = channel_bin_matrix(channels);
  const Eigen::Matrix<double, 6, 6> centering =
      Eigen::Matrix<double, 6, 6>::Identity() - t_hat * Eigen::Matrix<double, 1, 6>::Ones();
  const BinMatrix a = w.asDiagonal() * centering * m;
  const Eigen::Matrix<double, 8, 8> h = a.transpose() * a;

  ChannelVector lo, hi;
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto& b = problem.bounds[j];
    lo(jj) = b.lo > 0.0 ? channel_irradiance(channels[j], b.lo, problem.board_temp_c) / total : 0.0;
    hi(jj) = channel_irradiance(channels[j], b.hi, problem.board_temp_c) / total;
  }
  if (lo.sum() > 1.0 || hi.sum() < 1.0) {
    throw Error(ErrorKind::Unachievable, "requested total is outside the duty bounds");
  }

  auto objective = [&](const ChannelVector& x) { return (a * x).squaredNorm(); };
  auto gradient = [&](const ChannelVector& x) -> ChannelVector { return 2.0 * (h * x); };

  const double lipschitz =
      std::max(2.0 * Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>>(h).eigenvalues().maxCoeff(),
               1e-12);
  const double step_min = 1e-6 / lipschitz;
  const double step_max = 1e6 / lipschitz;

  // Start from the minimum-norm point of the constraint set; gradient steps
  // then only move within range(H), which keeps the tie-break deterministic.
  ChannelVector x = project_capped_simplex(ChannelVector::Constant(1.0 / kChannelCount), lo, hi, 1.0);
  double fx = objective(x);
  ChannelVector g = gradient(x);
  double step = 1.0 / lipschitz;

  FitResult result;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const ChannelVector trial = project_capped_simplex(x - step * g, lo, hi, 1.0);
    const ChannelVector d = trial - x;
    if (d.norm() <= options.step_tolerance * std::max(x.norm(), 1e-300)) {
      result.converged = true;
      break;
    }
    const double slope = g.dot(d);
    double lambda = 1.0;
    ChannelVector x_new = trial;
    double f_new = objective(x_new);
    while (f_new > fx + 1e-4 * lambda * slope && lambda > 1e-12) {
      lambda *= 0.5;
      x_new = x + lambda * d;
      f_new = objective(x_new);
    }
    if (f_new > fx) {
      // No descent left at machine precision.
      result.converged = true;
      break;
    }
    const ChannelVector s = x_new - x;
    const ChannelVector g_new = gradient(x_new);
    const double sy = s.dot(g_new - g);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, step_min, step_max) : step_max;

    const bool small = s.norm() < options.step_tolerance * std::max(x_new.norm(), 1e-300);
    x = x_new;
    fx = f_new;
    g = g_new;
    if (options.observer) options.observer(it + 1, fx);
    if (small) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.iterations = it;
  result.residual = fx;

  std::array<double, kChannelCount> powers{};
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    const double p = total * x(static_cast<Eigen::Index>(j));
    const auto& b = problem.bounds[j];
    result.duties[j] =
        std::clamp(duty_for_irradiance(channels[j], p, problem.board_temp_c), b.lo, b.hi);
    powers[j] = channel_irradiance(channels[j], result.duties[j], problem.board_temp_c);
  }
  result.powers_w_m2 = powers;

  // Verification path: rebuild the spectrum from duties, then bin it.
  result.achieved_fractions = iec::bin_fractions(board_spectrum(channels, powers));
  const auto match = iec::spectral_match(result.achieved_fractions, target);
  result.ratios = match.ratios;
  result.achieved_class = match.grade;
  return result;
}

Am15gPreset::Am15gPreset(ChannelSet channels) : channels_(std::move(channels)) {
  for (std::size_t k = 0; k < kPresetLevels.size(); ++k) {
    FitProblem problem;
    problem.target = iec::am15g_reference();
    problem.total_irradiance_w_m2 = kPresetLevels[k];
    cache_[k] = fit_duties(problem, channels_);
  }
}

std::array<double, kChannelCount> Am15gPreset::duties(double level_w_m2) const {
  if (!(level_w_m2 >= channels_.total_min() && level_w_m2 <= channels_.total_max())) {
    throw Error(ErrorKind::Unachievable,
                "level is outside the achievable range [" + std::to_string(channels_.total_min()) +
                    ", " + std::to_string(channels_.total_max()) + "] W/m^2");
  }
  for (std::size_t k = 0; k < kPresetLevels.size(); ++k) {
    if (std::abs(level_w_m2 - kPresetLevels[k]) <= 1e-12 * kPresetLevels[k]) return cache_[k].duties;
  }
  if (level_w_m2 < kPresetLevels.front() || level_w_m2 > kPresetLevels.back()) {
    FitProblem problem;
    problem.target = iec::am15g_reference();
    problem.total_irradiance_w_m2 = level_w_m2;
    return fit_duties(problem, channels_).duties;
  }

  std::size_t k = 0;
  while (kPresetLevels[k + 1] < level_w_m2) ++k;
  const double la = kPresetLevels[k];
  const double lb = kPresetLevels[k + 1];
  const double w = std::log(level_w_m2 / la) / std::log(lb / la);
  const auto& da = cache_[k].duties;
  const auto& db = cache_[k + 1].duties;

  std::array<double, kChannelCount> d{};
  std::array<double, kChannelCount> p{};
  double sum = 0.0;
  for (std::size_t j = 0; j < kChannelCount; ++j) {
    d[j] = (da[j] > 0.0 && db[j] > 0.0) ? std::exp((1.0 - w) * std::log(da[j]) + w * std::log(db[j]))
                                        : (1.0 - w) * da[j] + w * db[j];
    p[j] = channel_irradiance(channels_[j], std::clamp(d[j], 0.0, 1.0));
    sum += p[j];
  }
  // Trim the interpolated mix onto the requested total.
  if (sum > 0.0) {
    const double scale = level_w_m2 / sum;
    for (std::size_t j = 0; j < kChannelCount; ++j) {
      d[j] = duty_for_irradiance(channels_[j], std::min(p[j] * scale, channels_[j].irr_max()));
      p[j] = channel_irradiance(channels_[j], d[j]);
    }
  }
  // Interpolation is not guaranteed to stay in class A; refit when it does not.
  if (iec::spectral_match(iec::bin_fractions(board_spectrum(channels_, p))).grade != iec::Grade::A) {
    FitProblem problem;
    problem.target = iec::am15g_reference();
    problem.total_irradiance_w_m2 = level_w_m2;
    return fit_duties(problem, channels_).duties;
  }
  return d;
}

}  // namespace solartb::fit
