#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "solartb/config.hpp"
#include "solartb/error.hpp"

using namespace solartb;

namespace {

ErrorKind kind_of(const std::string& json) {
  try {
    config_from_json(json);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << json;
  return ErrorKind::Io;
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
  const auto cfg = config_from_json("{}");
  EXPECT_EQ(config_hash(cfg), config_hash(SystemConfig{}));
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.experiments.lti_samples, 140);
}

TEST(Config, CanonicalRoundTrip) {
  SystemConfig cfg;
  cfg.seed = 99;
  cfg.chamber.geometry.door_reflectance = 0.55;
  cfg.chamber.drift.warmup_amplitude = 0.01;
  cfg.regulator.mode = control::RegulatorMode::PerBin;
  cfg.custom_target = iec::BinFractions({20, 20, 20, 15, 10, 15});
  const std::string text = config_to_json(cfg, 2);
  const auto back = config_from_json(text);
  EXPECT_EQ(config_to_json(back, 2), text);
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_NE(config_hash(back), config_hash(SystemConfig{}));
}

TEST(Config, PartialOverrides) {
  const auto cfg = config_from_json(
      R"({"seed": 7, "geometry": {"door_reflectance": 0.2}, "regulator": {"mode": "PER_BIN", "ki": 0.05}})");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_DOUBLE_EQ(cfg.chamber.geometry.door_reflectance, 0.2);
  EXPECT_DOUBLE_EQ(cfg.chamber.geometry.wall_reflectance[0], 0.95);
  EXPECT_EQ(cfg.regulator.mode, control::RegulatorMode::PerBin);
  EXPECT_DOUBLE_EQ(cfg.regulator.ki, 0.05);
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(kind_of("not json"), ErrorKind::Config);
  EXPECT_EQ(kind_of(R"({"sed": 1})"), ErrorKind::Config);
  EXPECT_EQ(kind_of(R"({"geometry": {"door_reflectence": 0.5}})"), ErrorKind::Config);
  EXPECT_EQ(kind_of(R"({"regulator": {"mode": "PID"}})"), ErrorKind::Config);
  EXPECT_EQ(kind_of(R"({"geometry": {"door_reflectance": 1.5}})"), ErrorKind::Config);
  EXPECT_EQ(kind_of(R"({"experiments": {"sti_cadence_s": 0}})"), ErrorKind::Config);
  EXPECT_EQ(kind_of(R"({"seed": "x"})"), ErrorKind::Config);
}

TEST(Config, SaveLoadAndMissingFile) {
  const auto path = std::filesystem::temp_directory_path() / "solartb_cfg_test.json";
  SystemConfig cfg;
  cfg.seed = 1234;
  save_config(path, cfg);
  EXPECT_EQ(config_hash(load_config(path)), config_hash(cfg));
  std::filesystem::remove(path);
  try {
    load_config(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Config, HashIsSixteenHexDigits) {
  const auto h = config_hash(SystemConfig{});
  ASSERT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
}
