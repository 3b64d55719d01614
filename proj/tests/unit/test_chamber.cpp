#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "solartb/chamber.hpp"
#include "solartb/error.hpp"
#include "solartb/iec.hpp"

using namespace solartb;

namespace {

ChamberConfig quiet_config() {
  ChamberConfig c;
  c.drift = DriftModel::none();
  return c;
}

// Sampled on a 1 nm grid; the sensor integrals are trapezoidal on the spectrum grid.
Spectrum flat(double lo, double hi, double v = 1.0) {
  return Spectrum::sampled(lo, hi, 1.0, [v](double) { return v; });
}

std::vector<double> rows_mean(const IrradianceField& f, int r0, int r1) {
  std::vector<double> out;
  for (int r = r0; r < r1; ++r) {
    double s = 0.0;
    for (int c = 0; c < f.grid_n; ++c) s += f.at(r, c);
    out.push_back(s / f.grid_n);
  }
  return out;
}

}  // namespace

TEST(Field, GridAxisIsCellCentred) {
  const auto a = grid_axis(165.0, 8);
  ASSERT_EQ(a.size(), 8u);
  EXPECT_DOUBLE_EQ(a.front(), -82.5 + 165.0 / 16.0);
  EXPECT_DOUBLE_EQ(a.back(), 82.5 - 165.0 / 16.0);
}

TEST(Field, SerialAndParallelKernelsAgree) {
  const FieldModel m(ChamberGeometry{});
  std::vector<FieldPoint> pts;
  for (double x : grid_axis(165.0, 17)) {
    for (double y : grid_axis(165.0, 17)) pts.push_back({x, y});
  }
  std::vector<double> a(pts.size()), b(pts.size());
  kernels::field_serial(m.sources(), m.height_mm(), pts, a);
  kernels::field_omp(m.sources(), m.height_mm(), pts, b);
  EXPECT_EQ(a, b);
}

TEST(Field, SinglePointSourceInverseSquareCosine) {
  // Lambertian source at height h: E = h^2 / r^4.
  const std::vector<PointSource> src{{0.0, 0.0, 1.0}};
  const std::vector<FieldPoint> pts{{0.0, 0.0}, {30.0, 40.0}};
  std::vector<double> out(2);
  kernels::field_serial(src, 100.0, pts, out);
  EXPECT_DOUBLE_EQ(out[0], 1.0 / (100.0 * 100.0));
  EXPECT_NEAR(out[1], 1e4 / std::pow(100.0 * 100.0 + 2500.0, 2), 1e-18);
}

TEST(Field, DefaultGeometryCalibration) {
  const auto f = irradiance_field(ChamberGeometry{}, 500.0, 8);
  EXPECT_NEAR(f.mean(), 500.0, 1e-9);
  const double nu = iec::nonuniformity(f.values_w_m2).percent;
  EXPECT_GE(nu, 1.0);
  EXPECT_LE(nu, 2.0);
  // Door side darker than the rear.
  const auto front = rows_mean(f, 0, 4), rear = rows_mean(f, 4, 8);
  EXPECT_GT(std::accumulate(rear.begin(), rear.end(), 0.0), std::accumulate(front.begin(), front.end(), 0.0));
  // Left/right walls are identical, so the field is mirror-symmetric in x.
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(f.at(r, c), f.at(r, 7 - c), 1e-9);
  }
}

TEST(Field, DarkDoorDegradesUniformity) {
  ChamberGeometry g;
  g.door_reflectance = 0.2;
  const auto f = irradiance_field(g, 500.0, 8);
  EXPECT_NE(iec::nonuniformity(f.values_w_m2).grade, iec::Grade::A);
}

TEST(Field, OverrideReplacesModel) {
  ChamberGeometry g;
  g.field_override = std::vector<double>(64, 1.0);
  const FieldModel m(g);
  const auto f = m.field(300.0, 8);
  EXPECT_EQ(iec::nonuniformity(f.values_w_m2).percent, 0.0);
  EXPECT_DOUBLE_EQ(m.relative_at(10.0, -20.0), 1.0);
}

TEST(Field, ReferenceGridMeanIsUnity) {
  const FieldModel m(ChamberGeometry{});
  double s = 0.0;
  for (double y : grid_axis(165.0, 8)) {
    for (double x : grid_axis(165.0, 8)) s += m.relative_at(x, y);
  }
  EXPECT_NEAR(s / 64.0, 1.0, 1e-12);
}

TEST(Field, GeometryValidation) {
  ChamberGeometry g;
  g.wall_reflectance[2] = 1.2;
  EXPECT_THROW(g.validate(), Error);
  g = {};
  g.dut_plane_z_mm = 500.0;
  EXPECT_THROW(g.validate(), Error);
  EXPECT_THROW(irradiance_field(ChamberGeometry{}, 1.0, 1), Error);
}

TEST(Sensors, SpectrometerKernelNormalized) {
  const SpectrometerSpec spec;
  for (std::size_t ch = 0; ch < kSpectrometerChannels; ++ch) {
    double s = 0.0;
    for (double l = 300.0; l <= 1100.0; l += 0.01) s += spectrometer_kernel(spec, ch, l) * 0.01;
    EXPECT_NEAR(s, 1.0, 1e-4) << ch;
    EXPECT_EQ(spectrometer_kernel(spec, ch, spec.centers_nm[ch] + 31.0), 0.0);
  }
}

TEST(Sensors, FlatSpectrumReadsUnity) {
  const SpectrometerSpec spec;
  const auto v = spectrometer_response(flat(300, 1200, 0.7), spec);
  for (double x : v) EXPECT_NEAR(x, 0.7, 0.7 * 1e-3);
}

TEST(Sensors, NoiseIsSeeded) {
  const SpectrometerSpec spec;
  const auto s = flat(300, 1200, 0.5);
  EXPECT_EQ(spectrometer_read(s, spec, 9).values, spectrometer_read(s, spec, 9).values);
  EXPECT_NE(spectrometer_read(s, spec, 9).values, spectrometer_read(s, spec, 10).values);
  EXPECT_TRUE(spectrometer_read(flat(300, 1200, 9.0), spec, 1).saturated);
}

TEST(Sensors, LuxRanges) {
  const SensorSuite suite;
  EXPECT_EQ(lux_classify(90000.0, suite.lux_low, 1).status, LuxStatus::Saturated);
  EXPECT_EQ(lux_classify(90000.0, suite.lux_high, 1).status, LuxStatus::Ok);
  EXPECT_EQ(lux_classify(0.5, suite.lux_high, 1).status, LuxStatus::BelowFloor);
  EXPECT_EQ(lux_classify(0.5, suite.lux_low, 1).status, LuxStatus::Ok);
  EXPECT_EQ(lux_classify(0.0, suite.lux_low, 1).status, LuxStatus::BelowFloor);
  EXPECT_EQ(lux_classify(3e5, suite.lux_high, 1).status, LuxStatus::Saturated);
}

TEST(Sensors, DutIscOfFlatSpectrum) {
  // area * (ramp 300-400 + plateau 400-1100 + ramp 1100-1150) * 1 W/m^2/nm
  const DutCell cell;
  const double expected = 1.84e-4 * (0.5 * 100 * 0.45 + 700 * 0.45 + 0.5 * 50 * 0.45);
  EXPECT_NEAR(dut_isc(flat(300, 1200), cell, 25.0), expected, expected * 1e-9);
  EXPECT_NEAR(dut_isc(flat(300, 1200), cell, 35.0), expected * 1.005, expected * 1e-9);
}

TEST(Chamber, DoorInterlockKillsLight) {
  Chamber ch(default_board(), quiet_config(), 1);
  ch.set_duties({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  EXPECT_TRUE(ch.lit());
  EXPECT_GT(ch.read_lux(LuxRange::High).lux, 1000.0);
  ch.set_door(DoorState::Open);
  EXPECT_FALSE(ch.lit());
  EXPECT_EQ(ch.read_lux(LuxRange::Low).status, LuxStatus::BelowFloor);
  EXPECT_EQ(ch.read_dut_current(), 0.0);
  ch.set_door(DoorState::Closed);
  EXPECT_TRUE(ch.lit());
}

TEST(Chamber, WarmupFollowsExponential) {
  ChamberConfig c = quiet_config();
  c.drift.warmup_amplitude = 0.04;
  c.drift.warmup_tau_s = 600.0;
  Chamber ch(default_board(), c, 1);
  ch.set_duties({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  EXPECT_NEAR(ch.drift_factor(), 0.96, 1e-12);
  ch.advance(600.0);
  EXPECT_NEAR(ch.drift_factor(), 1.0 - 0.04 * std::exp(-1.0), 1e-12);
}

TEST(Chamber, ReseedReproducesReadings) {
  Chamber a(default_board(), ChamberConfig{}, 5), b(default_board(), ChamberConfig{}, 5);
  for (auto* ch : {&a, &b}) ch->set_duties({0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3});
  for (int i = 0; i < 50; ++i) {
    a.advance(1.0);
    b.advance(1.0);
    EXPECT_EQ(a.read_dut_current(), b.read_dut_current());
    EXPECT_EQ(a.read_spectrometer().values, b.read_spectrometer().values);
  }
}

TEST(Chamber, DutTemperatureStage) {
  Chamber ch(default_board(), quiet_config(), 1);
  ch.set_dut_temperature(45.0);
  ch.advance(30.0);
  EXPECT_NEAR(ch.dut_temperature(), 45.0 - 20.0 * std::exp(-1.0), 1e-9);
  try {
    ch.set_dut_temperature(81.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TargetOutOfRange);
  }
  EXPECT_THROW(ch.set_dut_position(100.0, 0.0), Error);
  ch.set_dut_position(-80.0, 80.0);
  EXPECT_EQ(ch.dut_x_mm(), -80.0);
}

TEST(Chamber, ClockRejectsNonPositiveSteps) {
  Chamber ch(default_board(), quiet_config(), 1);
  EXPECT_THROW(ch.advance(0.0), Error);
  EXPECT_THROW(ch.clock().set_scale(-1.0), Error);
  ch.advance(2.5);
  EXPECT_DOUBLE_EQ(ch.now(), 2.5);
}

TEST(Chamber, ExpectedCurrentMatchesSpectrumIntegral) {
  Chamber ch(default_board(), quiet_config(), 1);
  ch.set_duties({0.2, 0.4, 0.6, 0.8, 0.1, 0.3, 0.5, 0.7});
  const double via_spectrum = dut_isc(ch.spectrum_at_dut(), ch.config().dut, ch.dut_temperature());
  EXPECT_NEAR(ch.dut_current_expected() / via_spectrum, 1.0, 1e-9);
}
