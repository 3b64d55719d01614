#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "solartb/config.hpp"
#include "solartb/control.hpp"
#include "solartb/error.hpp"
#include "solartb/experiment.hpp"
#include "solartb/testbed.hpp"

using namespace solartb;
using control::Powers;

namespace {

double sum(const Powers& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

SystemConfig quiet() {
  SystemConfig c;
  c.chamber.drift = DriftModel::none();
  return c;
}

}  // namespace

TEST(Regulator, TotalUpdateFormula) {
  const control::RegulatorConfig cfg;
  EXPECT_DOUBLE_EQ(control::regulate_total(100.0, 90.0, 1.0, cfg), 1.0 + 0.02 * 1.0 * 10.0 / 100.0);
  EXPECT_DOUBLE_EQ(control::regulate_total(100.0, 100.0, 1.3, cfg), 1.3);
  EXPECT_THROW(control::regulate_total(0.0, 1.0, 1.0, cfg), Error);
  EXPECT_THROW(control::regulate_total(1.0, 0.0, 1.0, cfg), Error);
  control::RegulatorConfig bad;
  bad.ki = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Regulator, DistributeScale) {
  const Powers nominal{1, 2, 3, 4, 0, 1, 1, 1};
  const Powers max{10, 10, 10, 4, 5, 10, 10, 10};
  const auto p = control::distribute_scale(nominal, max, 0.5);
  ASSERT_TRUE(p);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ((*p)[j], 0.5 * nominal[j]);

  // Channel 3 is already at its maximum; the rest absorb the increase.
  const auto q = control::distribute_scale(nominal, max, 1.1);
  ASSERT_TRUE(q);
  EXPECT_NEAR(sum(*q), 1.1 * sum(nominal), 1e-12);
  EXPECT_DOUBLE_EQ((*q)[3], 4.0);
  EXPECT_EQ((*q)[4], 0.0);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_LE((*q)[j], max[j]);

  EXPECT_FALSE(control::distribute_scale(nominal, max, 10.0));
  EXPECT_FALSE(control::distribute_scale(nominal, max, -0.1));
}

TEST(Regulator, GroupByBinCountsChannels) {
  SpectrometerValues ones{};
  ones.fill(1.0);
  const auto b = control::group_by_bin(ones, SpectrometerSpec{});
  const std::array<double, 6> expected{4, 4, 3, 3, 2, 2};
  EXPECT_EQ(b, expected);
}

TEST(Regulator, TotalModeRemovesConstantDrift) {
  Testbed tb(quiet());
  tb.set_irradiance(500.0);
  tb.set_feedback(true);
  const Chamber& ch = tb.chamber();
  const auto nominal = tb.regulator().powers();
  const auto setpoint = ch.expected_spectrometer(nominal);

  const ChannelSet board = default_board();
  control::Regulator reg(control::RegulatorConfig{}, board);
  reg.engage(nominal, setpoint, 25.0);
  Powers p = nominal;
  for (int k = 0; k < 2000; ++k) {
    Powers emitted = p;
    for (double& v : emitted) v *= 0.97;
    SpectrometerReading r;
    r.values = ch.expected_spectrometer(emitted);
    if (auto next = reg.step(r, SpectrometerSpec{})) p = *next;
  }
  // The loop regulates the summed spectrometer signal. Saturated channels
  // push power into others, so total power only approximately tracks 1/0.97.
  Powers emitted = p;
  for (double& v : emitted) v *= 0.97;
  const auto got = ch.expected_spectrometer(emitted);
  const double want = std::accumulate(setpoint.begin(), setpoint.end(), 0.0);
  EXPECT_NEAR(std::accumulate(got.begin(), got.end(), 0.0) / want, 1.0, 1e-6);
  EXPECT_NEAR(reg.scale(), 1.0 / 0.97, 1e-3);
}

TEST(Regulator, HoldsOnSaturatedReading) {
  const ChannelSet board = default_board();
  control::Regulator reg(control::RegulatorConfig{}, board);
  SpectrometerReading r;
  r.values.fill(1.0);
  EXPECT_FALSE(reg.step(r, SpectrometerSpec{}));
  Powers nominal{};
  nominal.fill(10.0);
  SpectrometerValues sp{};
  sp.fill(1.0);
  reg.engage(nominal, sp, 25.0);
  r.saturated = true;
  EXPECT_FALSE(reg.step(r, SpectrometerSpec{}));
  EXPECT_EQ(reg.held_steps(), 1);
}

TEST(Regulator, PerBinKeepsClassAUnderDrift) {
  SystemConfig cfg;
  cfg.regulator.mode = control::RegulatorMode::PerBin;
  Testbed tb(cfg);
  const auto r = run_lti(tb, lti_options(cfg.experiments, true), 3);
  EXPECT_EQ(r.metric.grade, iec::Grade::A);
  EXPECT_EQ(iec::spectral_match(tb.read_bins()).grade, iec::Grade::A);
}

TEST(Testbed, ResetState) {
  Testbed tb(SystemConfig{});
  tb.set_irradiance(300.0);
  tb.set_feedback(true);
  tb.advance(10.0);
  tb.reset();
  EXPECT_EQ(tb.now(), 0.0);
  EXPECT_FALSE(tb.feedback());
  EXPECT_FALSE(tb.irradiance_setting());
  for (int n = 1; n <= 8; ++n) EXPECT_EQ(tb.channel_percent(n), 0.0);
}

TEST(Testbed, ChannelPercentValidation) {
  Testbed tb(SystemConfig{});
  tb.set_channel_percent(3, 42.0);
  EXPECT_NEAR(tb.channel_percent(3), 42.0, 100.0 / 65535.0);
  EXPECT_THROW(tb.set_channel_percent(0, 1.0), Error);
  EXPECT_THROW(tb.set_channel_percent(9, 1.0), Error);
  EXPECT_THROW(tb.set_channel_percent(1, 150.0), Error);
}

TEST(Testbed, CustomTarget) {
  Testbed plain(SystemConfig{});
  try {
    plain.set_target(SpectralTarget::Custom);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  SystemConfig cfg;
  cfg.custom_target = iec::BinFractions({20, 20, 20, 15, 10, 15});
  Testbed tb(cfg);
  tb.set_target(SpectralTarget::Custom);
  tb.set_irradiance(400.0);
  const auto m = iec::spectral_match(tb.read_bins(), *cfg.custom_target);
  EXPECT_EQ(m.grade, iec::Grade::A);
}

TEST(Testbed, Am15gBinsAtPresetLevels) {
  Testbed tb(SystemConfig{});
  for (double level : {1.0, 10.0, 50.0, 300.0, 500.0, 750.0}) {
    tb.reset();
    tb.set_irradiance(level);
    EXPECT_EQ(iec::spectral_match(tb.read_bins()).grade, iec::Grade::A) << level;
  }
  EXPECT_THROW(tb.set_irradiance(1000.0), Error);
}

TEST(Testbed, FeedbackDoesNotChangeDriftDraws) {
  // Same seed, same steps: the uncontrolled drift factor is identical
  // whether or not the loop runs.
  Testbed a(SystemConfig{}), b(SystemConfig{});
  for (auto* tb : {&a, &b}) {
    tb->set_seed(11);
    tb->set_irradiance(500.0);
  }
  b.set_feedback(true);
  for (int i = 0; i < 20; ++i) {
    a.advance(7.0);
    b.advance(7.0);
    EXPECT_EQ(a.chamber().drift_factor(), b.chamber().drift_factor());
  }
}

TEST(Experiment, StiValidation) {
  Testbed tb(SystemConfig{});
  StiOptions o;
  o.cadence_s = 0.0;
  EXPECT_THROW(run_sti(tb, o, 1), Error);
  o.cadence_s = 100.0;
  o.duration_s = 180.0;
  EXPECT_THROW(run_sti(tb, o, 1), Error);
}

TEST(Experiment, StiShapeAndDeterminism) {
  Testbed tb(SystemConfig{});
  const auto a = run_sti(tb, StiOptions{}, 42);
  const auto b = run_sti(tb, StiOptions{}, 42);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.series.size(), 180u);
  EXPECT_EQ(a.series.timestamps()[0], 1.0);
  EXPECT_EQ(a.series.timestamps()[179], 180.0);
  EXPECT_NE(run_sti(tb, StiOptions{}, 43).metric.percent, a.metric.percent);
}

TEST(Experiment, LtiSpansSeventyHours) {
  Testbed tb(SystemConfig{});
  const auto r = run_lti(tb, LtiOptions{}, 1);
  ASSERT_EQ(r.series.size(), 140u);
  EXPECT_DOUBLE_EQ(r.series.timestamps().back(), 70.0 * 3600.0);
  EXPECT_EQ(r.kind, iec::InstabilityKind::Long);
  EXPECT_TRUE(r.feedback);
}

TEST(Experiment, ZeroDriftLtiIsNoiseLimited) {
  Testbed tb(quiet());
  for (bool fb : {false, true}) {
    LtiOptions o;
    o.feedback = fb;
    EXPECT_LT(run_lti(tb, o, 8).metric.percent, 0.1) << fb;
  }
}

TEST(Experiment, FeedbackImprovesStiForEachSeed) {
  std::vector<std::uint64_t> seeds(20);
  std::iota(seeds.begin(), seeds.end(), 1);
  const auto pairs = paired_sti_omp(SystemConfig{}, StiOptions{}, seeds);
  for (const auto& p : pairs) {
    EXPECT_LT(p.closed_loop.metric.percent, p.open_loop.metric.percent) << p.open_loop.seed;
  }
}

TEST(Experiment, SerialAndParallelBatchesAgree) {
  const std::vector<std::uint64_t> seeds{5, 6, 7, 8};
  const auto a = paired_sti_serial(SystemConfig{}, StiOptions{}, seeds);
  const auto b = paired_sti_omp(SystemConfig{}, StiOptions{}, seeds);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].open_loop, b[i].open_loop);
    EXPECT_EQ(a[i].closed_loop, b[i].closed_loop);
  }
}

TEST(Experiment, SeriesCsvAndJson) {
  Testbed tb(SystemConfig{});
  StiOptions o;
  o.duration_s = 3.0;
  const auto r = run_sti(tb, o, 1);
  std::ostringstream csv;
  write_series_csv(csv, r);
  EXPECT_EQ(csv.str().rfind("timestamp_s,value\n1,", 0), 0u);
  const auto j = result_json(r, "abc");
  EXPECT_NE(j.find("\"schema\": 1"), std::string::npos);
  EXPECT_NE(j.find("\"config_hash\": \"abc\""), std::string::npos);
}
