#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "solartb/error.hpp"
#include "solartb/format.hpp"
#include "solartb/iec.hpp"
#include "solartb/photometry.hpp"
#include "solartb/spectrum.hpp"

using namespace solartb;
using iec::Grade;

namespace {

Spectrum flat(double lo, double hi, double v = 1.0) { return Spectrum({lo, hi}, {v, v}); }

template <class F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(-2.5), "-2.5");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_number(x), back));
    EXPECT_EQ(back, x);
  }
}

TEST(Format, StrictParsing) {
  double d = 0.0;
  EXPECT_TRUE(parse_double("1e3", d));
  EXPECT_EQ(d, 1000.0);
  EXPECT_FALSE(parse_double("1e3x", d));
  EXPECT_FALSE(parse_double("", d));
  EXPECT_FALSE(parse_double("nan", d));
  std::uint64_t u = 0;
  EXPECT_TRUE(parse_u64("18446744073709551615", u));
  EXPECT_EQ(u, 18446744073709551615ULL);
  EXPECT_FALSE(parse_u64("18446744073709551616", u));
  EXPECT_FALSE(parse_u64("-1", u));
  EXPECT_FALSE(parse_u64("1.5", u));
}

TEST(Format, Fnv1aKnownVectors) {
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Spectrum, RejectsInvalid) {
  expect_error(ErrorKind::InvalidSpectrum, [] { Spectrum({400}, {1}); });
  expect_error(ErrorKind::InvalidSpectrum, [] { Spectrum({400, 400}, {1, 1}); });
  expect_error(ErrorKind::InvalidSpectrum, [] { Spectrum({400, 500}, {1, -1}); });
  expect_error(ErrorKind::InvalidSpectrum, [] { Spectrum({400, 500}, {1}); });
}

TEST(Spectrum, IntegralsAndInterpolation) {
  const Spectrum ramp({400, 500}, {0, 100});
  EXPECT_DOUBLE_EQ(ramp.value_at(450), 50.0);
  EXPECT_DOUBLE_EQ(ramp.value_at(399), 0.0);
  EXPECT_DOUBLE_EQ(ramp.total(), 5000.0);
  // Exact for a linear segment: area of the trapezoid 450..500.
  EXPECT_DOUBLE_EQ(ramp.integrate(450, 500), 3750.0);
  EXPECT_DOUBLE_EQ(ramp.integrate(300, 350), 0.0);
  EXPECT_DOUBLE_EQ(ramp.scaled(2.0).total(), 10000.0);
}

TEST(Spectrum, CsvRoundTrip) {
  const Spectrum s({400, 401.5, 1100}, {0.25, 1.0 / 3.0, 2.0});
  std::stringstream ss;
  write_spectrum_csv(ss, s);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "wavelength_nm,irradiance_w_m2_nm");
  EXPECT_EQ(read_spectrum_csv(ss), s);
  std::stringstream bad("wavelength_nm,irradiance_w_m2_nm\n400,x\n");
  expect_error(ErrorKind::Io, [&] { read_spectrum_csv(bad); });
}

TEST(Iec, ReferenceFractionsPerBin) {
  const auto r = iec::am15g_reference();
  const std::array<double, 6> expected{18.4, 19.9, 18.4, 14.9, 12.5, 15.9};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(r[i], expected[i]);
  EXPECT_NEAR(r.sum(), 100.0, 1e-12);
}

TEST(Iec, ClassLimits) {
  EXPECT_EQ(iec::grade_spectral(std::array{0.75, 1.25, 1.0, 1.0, 1.0, 1.0}), Grade::A);
  EXPECT_EQ(iec::grade_spectral(std::array{0.7499, 1.0, 1.0, 1.0, 1.0, 1.0}), Grade::B);
  EXPECT_EQ(iec::grade_spectral(std::array{1.4, 1.0, 1.0, 1.0, 1.0, 1.0}), Grade::B);
  EXPECT_EQ(iec::grade_spectral(std::array{2.0, 0.4, 1.0, 1.0, 1.0, 1.0}), Grade::C);
  EXPECT_EQ(iec::grade_spectral(std::array{2.01, 1.0, 1.0, 1.0, 1.0, 1.0}), Grade::Fail);
  EXPECT_EQ(iec::grade_nonuniformity(2.0), Grade::A);
  EXPECT_EQ(iec::grade_nonuniformity(2.0001), Grade::B);
  EXPECT_EQ(iec::grade_nonuniformity(10.0), Grade::C);
  EXPECT_EQ(iec::grade_nonuniformity(10.5), Grade::Fail);
  EXPECT_EQ(iec::grade_instability(0.5, iec::InstabilityKind::Short), Grade::A);
  EXPECT_EQ(iec::grade_instability(0.51, iec::InstabilityKind::Short), Grade::B);
  EXPECT_EQ(iec::grade_instability(2.0, iec::InstabilityKind::Long), Grade::A);
  EXPECT_EQ(iec::grade_instability(5.0, iec::InstabilityKind::Long), Grade::B);
}

TEST(Iec, FlatSpectrumBinning) {
  // 100 nm bins get 1/7 of 400-1100 nm each, the 200 nm last bin 2/7.
  const auto b = iec::bin_fractions(flat(300, 1200));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(b[i], 100.0 / 7.0, 1e-12);
  EXPECT_NEAR(b[5], 200.0 / 7.0, 1e-12);
  expect_error(ErrorKind::DomainTooNarrow, [] { iec::bin_fractions(flat(450, 1100)); });
  expect_error(ErrorKind::EmptyOrNonPositive, [] { iec::bin_fractions(flat(300, 1200, 0.0)); });
}

TEST(Iec, SpectralMatchOfReferenceIsExactlyOne) {
  const auto m = iec::spectral_match(iec::am15g_reference());
  for (double r : m.ratios) EXPECT_EQ(r, 1.0);
  EXPECT_EQ(m.grade, Grade::A);
}

TEST(Iec, NonuniformityFormula) {
  const std::vector<double> v{1.0, 1.02, 0.98, 1.0};
  // (1.02 - 0.98) / (1.02 + 0.98) * 100
  EXPECT_NEAR(iec::nonuniformity(v).percent, 2.0, 1e-12);
  EXPECT_EQ(iec::nonuniformity(std::vector<double>{5, 5, 5}).percent, 0.0);
  expect_error(ErrorKind::EmptyOrNonPositive, [] { iec::nonuniformity(std::vector<double>{1.0}); });
  expect_error(ErrorKind::EmptyOrNonPositive, [] { iec::nonuniformity(std::vector<double>{1.0, 0.0}); });
}

TEST(Iec, SeriesValidationAndInstability) {
  expect_error(ErrorKind::TooFewSamples, [] { iec::MeasurementSeries({1}, {1}); });
  expect_error(ErrorKind::OutOfRange, [] { iec::MeasurementSeries({1, 1}, {1, 1}); });
  expect_error(ErrorKind::OutOfRange, [] { iec::MeasurementSeries({1, 2}, {1, -1}); });
  const iec::MeasurementSeries s({0, 1, 2}, {100, 101, 99});
  const auto r = iec::instability(s, iec::InstabilityKind::Short);
  EXPECT_NEAR(r.percent, 1.0, 1e-12);
  EXPECT_EQ(r.grade, Grade::B);
}

TEST(Iec, VerdictLetters) {
  iec::ClassificationResult c;
  c.spectral = Grade::A;
  c.uniformity = Grade::B;
  c.sti = Grade::A;
  c.lti = Grade::C;
  EXPECT_EQ(c.verdict(), "ABC");
  c.uniformity = Grade::Fail;
  EXPECT_EQ(c.verdict(), "AFC");
}

TEST(Photometry, PhotopicAnchors) {
  EXPECT_DOUBLE_EQ(photopic_v(555.0), 1.0);
  EXPECT_DOUBLE_EQ(photopic_v(300.0), 0.0);
  EXPECT_DOUBLE_EQ(photopic_v(800.0), 0.0);
  EXPECT_NEAR(photopic_v(500.0), 0.323, 1e-9);
  EXPECT_NEAR(photopic_v(600.0), 0.631, 1e-9);
}

TEST(Photometry, FlatSpectrumLux) {
  // 5 nm sum of the CIE 1924 table times 5 nm is 106.857 nm.
  const double lux = lux_from_spectrum(Spectrum::sampled(300, 900, 1.0, [](double) { return 1.0; }));
  EXPECT_NEAR(lux, 683.0 * 106.857, 683.0 * 106.857 * 5e-4);
  EXPECT_DOUBLE_EQ(lux_from_spectrum(flat(800, 1100)), 0.0);
}
