#pragma once

#include "solartb/spectrum.hpp"

namespace solartb {

inline constexpr double kMaxLuminousEfficacy = 683.0;  // lm/W at 555 nm

/// CIE 1924 photopic luminosity function, linear between 5 nm samples on
/// 380-780 nm and zero outside.
double photopic_v(double wavelength_nm);

/// 683 * integral of s(l) V(l) dl, in lux.
double lux_from_spectrum(const Spectrum& s);

}  // namespace solartb
