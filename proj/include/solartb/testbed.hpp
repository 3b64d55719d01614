#pragma once

// The complete instrument: chamber, AM1.5G presets, spectral target and the
// feedback regulator behind one command surface. `TestbedPort` is what the
// experiment runners and the evaluation suite talk to; it is implemented
// in-process by `Testbed` and over the wire by `scpi::RemoteTestbed`.

#include <memory>
#include <optional>
#include <vector>

#include "solartb/chamber.hpp"
#include "solartb/config.hpp"
#include "solartb/control.hpp"
#include "solartb/fit.hpp"

namespace solartb {

enum class SpectralTarget { Am15g, Custom };

class TestbedPort {
 public:
  virtual ~TestbedPort() = default;

  /// Back to the startup configuration: clock 0, board dark, door closed,
  /// feedback off.
  virtual void reset() = 0;
  virtual void set_seed(std::uint64_t seed) = 0;

  /// n is 1-based; percent in [0, 100].
  virtual void set_channel_percent(int n, double percent) = 0;
  virtual double channel_percent(int n) = 0;
  virtual void set_target(SpectralTarget target) = 0;
  /// Runs the preset (AM1.5G) or a fit (custom target) for this level.
  virtual void set_irradiance(double w_m2) = 0;
  virtual void set_feedback(bool on) = 0;

  virtual void advance(double dt_s) = 0;
  virtual double now() = 0;

  virtual SpectrometerValues read_spectrum() = 0;
  /// Bin fractions of the light reaching the DUT, as seen by a reference
  /// spectroradiometer.
  virtual iec::BinFractions read_bins() = 0;
  virtual LuxReading read_illuminance(LuxRange range) = 0;
  virtual double read_dut_current() = 0;
  virtual double read_dut_temperature() = 0;
  virtual void set_dut_temperature(double c) = 0;
  virtual void set_door(DoorState state) = 0;

  /// Total-irradiance map of the test area, row-major from the door side.
  virtual std::vector<double> scan(int grid_n) = 0;
};

class Testbed final : public TestbedPort {
 public:
  explicit Testbed(SystemConfig cfg);

  const SystemConfig& config() const { return cfg_; }
  /// Replace the stored configuration and reset to it.
  void reconfigure(SystemConfig cfg);

  void reset() override;
  void set_seed(std::uint64_t seed) override;
  void set_channel_percent(int n, double percent) override;
  double channel_percent(int n) override;
  void set_target(SpectralTarget target) override;
  void set_irradiance(double w_m2) override;
  void set_feedback(bool on) override;
  void advance(double dt_s) override;
  double now() override { return chamber_->now(); }
  SpectrometerValues read_spectrum() override;
  iec::BinFractions read_bins() override;
  LuxReading read_illuminance(LuxRange range) override;
  double read_dut_current() override { return chamber_->read_dut_current(); }
  double read_dut_temperature() override { return chamber_->read_dut_temperature(); }
  void set_dut_temperature(double c) override { chamber_->set_dut_temperature(c); }
  void set_door(DoorState state) override { chamber_->set_door(state); }
  std::vector<double> scan(int grid_n) override;

  SpectralTarget target() const { return target_; }
  std::optional<double> irradiance_setting() const { return irradiance_; }
  bool feedback() const { return feedback_; }
  const control::Regulator& regulator() const { return *regulator_; }
  Chamber& chamber() { return *chamber_; }
  const Chamber& chamber() const { return *chamber_; }
  const fit::Am15gPreset& preset() const { return *preset_; }

 private:
  void engage();
  void apply_powers(const control::Powers& p);
  void tick();

  SystemConfig cfg_;
  std::shared_ptr<const fit::Am15gPreset> preset_;
  std::unique_ptr<Chamber> chamber_;
  std::unique_ptr<control::Regulator> regulator_;
  SpectralTarget target_ = SpectralTarget::Am15g;
  std::optional<double> irradiance_;
  bool feedback_ = false;
  long long ticks_ = 0;
};

}  // namespace solartb
