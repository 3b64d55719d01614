#pragma once

// Whole-system configuration: JSON load/save and a stable fingerprint.
//
// Every section and field is optional; missing values keep the defaults
// below. Unknown keys are rejected so typos do not silently fall back.

#include <filesystem>
#include <optional>
#include <string>

#include "solartb/chamber.hpp"
#include "solartb/control.hpp"
#include "solartb/iec.hpp"
#include "solartb/lightboard.hpp"

namespace solartb {

struct ExperimentSettings {
  double sti_level_w_m2 = 750.0;
  double sti_duration_s = 180.0;
  double sti_cadence_s = 1.0;
  /// Lamp-on time before the STI window opens.
  double sti_settle_s = 300.0;
  double lti_level_w_m2 = 500.0;
  int lti_samples = 140;
  double lti_interval_s = 1800.0;
  int scan_grid_n = 8;
  double scan_level_w_m2 = 500.0;

  void validate() const;
};

struct SystemConfig {
  ChannelSet board = default_board();
  ChamberConfig chamber;
  control::RegulatorConfig regulator;
  ExperimentSettings experiments;
  /// Bin fractions (percent) used when the spectral target is CUSTom.
  std::optional<iec::BinFractions> custom_target;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Throws Error(Config) on malformed content or unknown keys.
SystemConfig config_from_json(const std::string& text);
/// Throws Error(Io) if the file cannot be read.
SystemConfig load_config(const std::filesystem::path& path);

/// Canonical form: every field, keys sorted, shortest round-trip numbers.
std::string config_to_json(const SystemConfig& cfg, int indent = -1);
void save_config(const std::filesystem::path& path, const SystemConfig& cfg);

/// FNV-1a over the canonical compact JSON, as 16 hex digits.
std::string config_hash(const SystemConfig& cfg);

}  // namespace solartb
