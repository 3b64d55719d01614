#pragma once

// SCPI command tree and dispatcher bound to one Testbed.
//
// Command set:
//   *IDN?  *RST  *OPC?  *CLS
//   SOURce:CHANnel<n>:INTensity[?] <0-100>     percent duty, n = 1..8
//   SOURce:SPECtrum:TARGet[?] AM15G|CUSTom
//   SOURce:SPECtrum:IRRadiance[?] <W/m2>
//   SOURce:CTRL:FEEDback[?] ON|OFF|1|0          (CONTrol is accepted for CTRL)
//   MEASure:SPECtrum?                           18 channel values
//   MEASure:SPECtrum:BINS?                      six bin fractions, percent
//   MEASure:ILLuminance? [LOW|HIGH]             lux; 9.9E37 when saturated
//   MEASure:DUT:CURRent?  MEASure:DUT:TEMPerature?
//   MEASure:SCAN? [<n>]                         n x n irradiance map
//   SYSTem:DUT:TEMPerature[?] <C>
//   SYSTem:DUT:POSition[?] <x_mm>,<y_mm>
//   SYSTem:TIME?  SYSTem:TIME:ADVance <s>  SYSTem:TIME:SCALe[?] <factor>
//   SYSTem:DOOR[?] OPEN|CLOSed
//   SYSTem:ERRor?  SYSTem:SEED[?] <u64>

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "solartb/scpi.hpp"
#include "solartb/testbed.hpp"

namespace solartb::scpi {

inline constexpr const char* kIdentity = "ETHZ-PBL,SOLARTB-SIM,0,1.0.0";

/// Expands relative headers to full paths. Each command resolves against
/// the path of the previous one (its header minus the leaf); if the header
/// is not found there, ancestors of that path are tried up to the root.
void resolve_paths(std::vector<Unit>& units);

/// True if the full header names a node of the command tree.
bool header_exists(const std::vector<Mnemonic>& header);

class Instrument {
 public:
  using Reload = std::function<SystemConfig()>;

  /// `reload` supplies the configuration for *RST; without it *RST resets
  /// to the testbed's current configuration.
  explicit Instrument(Testbed& testbed, Reload reload = {});

  /// Executes one line. Returns the joined query responses (no LF), or
  /// nothing if the line contained no answered query.
  std::optional<std::string> execute(std::string_view line);

  /// Advance virtual time by scale * wall seconds (free-running mode).
  void free_run(double wall_elapsed_s);

  ErrorQueue& errors() { return errors_; }
  Testbed& testbed() { return tb_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::optional<std::string> dispatch(const Command& cmd);

  Testbed& tb_;
  Reload reload_;
  ErrorQueue errors_;
  std::uint64_t seed_;
};

}  // namespace solartb::scpi
