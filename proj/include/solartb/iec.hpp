#pragma once

// IEC 60904-9 classification: spectral binning against the AM1.5G reference,
// spectral match, spatial non-uniformity and temporal instability.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "solartb/spectrum.hpp"

namespace solartb::iec {

inline constexpr std::size_t kBinCount = 6;

struct BinEdge {
  double lo_nm;
  double hi_nm;
};

/// [400,500) [500,600) [600,700) [700,800) [800,900) [900,1100]
inline constexpr std::array<BinEdge, kBinCount> kBins{{
    {400.0, 500.0}, {500.0, 600.0}, {600.0, 700.0},
    {700.0, 800.0}, {800.0, 900.0}, {900.0, 1100.0},
}};
inline constexpr double kRangeLoNm = 400.0;
inline constexpr double kRangeHiNm = 1100.0;

/// Six per-bin irradiance fractions in percent of the 400-1100 nm total.
class BinFractions {
 public:
  BinFractions() = default;
  /// Throws Error(OutOfRange) if any value < 0 or the sum is outside [99, 101].
  explicit BinFractions(std::array<double, kBinCount> percent);

  /// No sum check; used for reference tables and ideal targets.
  static BinFractions unchecked(std::array<double, kBinCount> percent);

  double operator[](std::size_t i) const { return percent_[i]; }
  const std::array<double, kBinCount>& values() const { return percent_; }
  double sum() const;

  friend bool operator==(const BinFractions&, const BinFractions&) = default;

 private:
  std::array<double, kBinCount> percent_{};
};

/// AM1.5G irradiance fractions per bin (percent), summing to exactly 100.
BinFractions am15g_reference();

enum class Grade { A, B, C, Fail };

char grade_letter(Grade g);
std::string grade_name(Grade g);
Grade worse(Grade a, Grade b);

struct ClassBound {
  double ratio_lo;
  double ratio_hi;
  double nonuniformity_pct;
  double sti_pct;
  double lti_pct;
};

/// Bounds for classes A, B, C (in that order). All bounds are inclusive.
inline constexpr std::array<ClassBound, 3> kClassLimits{{
    {0.75, 1.25, 2.0, 0.5, 2.0},
    {0.60, 1.40, 5.0, 2.0, 5.0},
    {0.40, 2.00, 10.0, 10.0, 10.0},
}};

/// Throws Error(DomainTooNarrow) unless `s` covers [400, 1100] nm, and
/// Error(EmptyOrNonPositive) if the spectrum carries no energy there.
BinFractions bin_fractions(const Spectrum& s);

struct SpectralMatch {
  std::array<double, kBinCount> ratios{};
  Grade grade = Grade::Fail;
  /// Ratio furthest from 1 (informational).
  double worst_ratio = 1.0;
  double worst_deviation() const;
};

/// Throws Error(OutOfRange) if any reference fraction is not > 0.
SpectralMatch spectral_match(const BinFractions& measured, const BinFractions& reference);
SpectralMatch spectral_match(const BinFractions& measured);

struct MetricResult {
  double percent = 0.0;
  Grade grade = Grade::Fail;
};

/// (max - min) / (max + min) * 100.
double max_min_contrast(std::span<const double> values);

/// Throws Error(EmptyOrNonPositive) for fewer than two values or any value <= 0.
MetricResult nonuniformity(std::span<const double> values);

class MeasurementSeries {
 public:
  MeasurementSeries() = default;
  /// Throws Error(TooFewSamples) for < 2 samples, Error(OutOfRange) for
  /// non-increasing timestamps or non-positive values.
  MeasurementSeries(std::vector<double> timestamps_s, std::vector<double> values);

  std::span<const double> timestamps() const { return timestamps_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const MeasurementSeries&, const MeasurementSeries&) = default;

 private:
  std::vector<double> timestamps_;
  std::vector<double> values_;
};

enum class InstabilityKind { Short, Long };

MetricResult instability(const MeasurementSeries& series, InstabilityKind kind);

Grade grade_spectral(std::span<const double> ratios);
Grade grade_nonuniformity(double percent);
Grade grade_instability(double percent, InstabilityKind kind);

struct ClassificationResult {
  Grade spectral = Grade::Fail;
  Grade uniformity = Grade::Fail;
  Grade sti = Grade::Fail;
  Grade lti = Grade::Fail;
  double worst_ratio = 1.0;
  double nonuniformity_pct = 0.0;
  double sti_pct = 0.0;
  double lti_pct = 0.0;

  Grade temporal() const { return worse(sti, lti); }
  /// e.g. "AAA"; failed criteria print as 'F'.
  std::string verdict() const;
};

ClassificationResult classify_overall(const SpectralMatch& spectral, const MetricResult& uniformity,
                                      const MetricResult& sti, const MetricResult& lti);

}  // namespace solartb::iec
