#include "solartb/iec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "solartb/error.hpp"

namespace solartb::iec {

BinFractions::BinFractions(std::array<double, kBinCount> percent) : percent_(percent) {
  for (double v : percent_) {
    if (!(v >= 0.0)) throw Error(ErrorKind::OutOfRange, "bin fraction must be >= 0");
  }
  const double s = sum();
  if (s < 99.0 || s > 101.0) {
    throw Error(ErrorKind::OutOfRange, "bin fractions must sum to 100 +/- 1");
  }
}

BinFractions BinFractions::unchecked(std::array<double, kBinCount> percent) {
  BinFractions f;
  f.percent_ = percent;
  return f;
}

double BinFractions::sum() const {
  return std::accumulate(percent_.begin(), percent_.end(), 0.0);
}

BinFractions am15g_reference() {
  return BinFractions::unchecked({18.4, 19.9, 18.4, 14.9, 12.5, 15.9});
}

char grade_letter(Grade g) {
  switch (g) {
    case Grade::A: return 'A';
    case Grade::B: return 'B';
    case Grade::C: return 'C';
    case Grade::Fail: return 'F';
  }
  return 'F';
}

std::string grade_name(Grade g) { return g == Grade::Fail ? "FAIL" : std::string(1, grade_letter(g)); }

Grade worse(Grade a, Grade b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

BinFractions bin_fractions(const Spectrum& s) {
  if (!s.covers(kRangeLoNm, kRangeHiNm)) {
    throw Error(ErrorKind::DomainTooNarrow, "spectrum must cover 400-1100 nm");
  }
  std::array<double, kBinCount> part{};
  double total = 0.0;
  for (std::size_t i = 0; i < kBinCount; ++i) {
    part[i] = s.integrate(kBins[i].lo_nm, kBins[i].hi_nm);
    total += part[i];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::EmptyOrNonPositive, "no irradiance in 400-1100 nm");
  }
  for (double& p : part) p = 100.0 * p / total;
  return BinFractions::unchecked(part);
}

double SpectralMatch::worst_deviation() const { return std::abs(worst_ratio - 1.0); }

Grade grade_spectral(std::span<const double> ratios) {
  for (std::size_t c = 0; c < kClassLimits.size(); ++c) {
    const auto& b = kClassLimits[c];
    const bool inside = std::all_of(ratios.begin(), ratios.end(), [&](double r) {
      return r >= b.ratio_lo && r <= b.ratio_hi;
    });
    if (inside) return static_cast<Grade>(c);
  }
  return Grade::Fail;
}

namespace {

template <class Limit>
Grade grade_by_limit(double percent, Limit limit) {
  for (std::size_t c = 0; c < kClassLimits.size(); ++c) {
    if (percent <= limit(kClassLimits[c])) return static_cast<Grade>(c);
  }
  return Grade::Fail;
}

}  // namespace

Grade grade_nonuniformity(double percent) {
  return grade_by_limit(percent, [](const ClassBound& b) { return b.nonuniformity_pct; });
}

Grade grade_instability(double percent, InstabilityKind kind) {
  if (kind == InstabilityKind::Short) {
    return grade_by_limit(percent, [](const ClassBound& b) { return b.sti_pct; });
  }
  return grade_by_limit(percent, [](const ClassBound& b) { return b.lti_pct; });
}

SpectralMatch spectral_match(const BinFractions& measured, const BinFractions& reference) {
  SpectralMatch m;
  double worst_dev = -1.0;
  for (std::size_t i = 0; i < kBinCount; ++i) {
    if (!(reference[i] > 0.0)) {
      throw Error(ErrorKind::OutOfRange, "reference fractions must be > 0");
    }
    m.ratios[i] = measured[i] / reference[i];
    const double dev = std::abs(m.ratios[i] - 1.0);
    if (dev > worst_dev) {
      worst_dev = dev;
      m.worst_ratio = m.ratios[i];
    }
  }
  m.grade = grade_spectral(m.ratios);
  return m;
}

SpectralMatch spectral_match(const BinFractions& measured) {
  return spectral_match(measured, am15g_reference());
}

double max_min_contrast(std::span<const double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return (*hi - *lo) / (*hi + *lo) * 100.0;
}

MetricResult nonuniformity(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::EmptyOrNonPositive, "non-uniformity needs at least two samples");
  }
  if (std::any_of(values.begin(), values.end(), [](double v) { return !(v > 0.0); })) {
    throw Error(ErrorKind::EmptyOrNonPositive, "non-uniformity samples must be > 0");
  }
  MetricResult r;
  r.percent = max_min_contrast(values);
  r.grade = grade_nonuniformity(r.percent);
  return r;
}

MeasurementSeries::MeasurementSeries(std::vector<double> timestamps_s, std::vector<double> values)
    : timestamps_(std::move(timestamps_s)), values_(std::move(values)) {
  if (timestamps_.size() != values_.size()) {
    throw Error(ErrorKind::OutOfRange, "timestamp and value counts differ");
  }
  if (values_.size() < 2) {
    throw Error(ErrorKind::TooFewSamples, "series needs at least two samples");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0)) throw Error(ErrorKind::OutOfRange, "series values must be > 0");
    if (i > 0 && !(timestamps_[i] > timestamps_[i - 1])) {
      throw Error(ErrorKind::OutOfRange, "timestamps must be strictly increasing");
    }
  }
}

MetricResult instability(const MeasurementSeries& series, InstabilityKind kind) {
  if (series.size() < 2) {
    throw Error(ErrorKind::TooFewSamples, "instability needs at least two samples");
  }
  MetricResult r;
  r.percent = max_min_contrast(series.values());
  r.grade = grade_instability(r.percent, kind);
  return r;
}

std::string ClassificationResult::verdict() const {
  return {grade_letter(spectral), grade_letter(uniformity), grade_letter(temporal())};
}

ClassificationResult classify_overall(const SpectralMatch& spectral, const MetricResult& uniformity,
                                      const MetricResult& sti, const MetricResult& lti) {
  ClassificationResult r;
  r.spectral = spectral.grade;
  r.uniformity = uniformity.grade;
  r.sti = sti.grade;
  r.lti = lti.grade;
  r.worst_ratio = spectral.worst_ratio;
  r.nonuniformity_pct = uniformity.percent;
  r.sti_pct = sti.percent;
  r.lti_pct = lti.percent;
  return r;
}

}  // namespace solartb::iec
