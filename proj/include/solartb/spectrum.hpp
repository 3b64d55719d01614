#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace solartb {

/// Spectral irradiance sampled on a strictly increasing wavelength grid.
///
/// Values are W m^-2 nm^-1. Between samples the spectrum is piecewise linear;
/// outside the grid it is zero. All integrals use the trapezoidal rule on the
/// native grid, with linear interpolation where an integration limit falls
/// between two samples.
class Spectrum {
 public:
  Spectrum() = default;

  /// Throws Error(InvalidSpectrum) unless both vectors have the same length
  /// >= 2, wavelengths are strictly increasing and all values are >= 0.
  Spectrum(std::vector<double> wavelengths_nm, std::vector<double> values_w_m2_nm);

  /// Samples `f` on [first_nm, last_nm] with the given step.
  static Spectrum sampled(double first_nm, double last_nm, double step_nm,
                          const std::function<double(double)>& f);

  std::span<const double> wavelengths() const { return wavelengths_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return wavelengths_.size(); }
  double first_nm() const { return wavelengths_.front(); }
  double last_nm() const { return wavelengths_.back(); }
  bool covers(double lo_nm, double hi_nm) const {
    return !wavelengths_.empty() && first_nm() <= lo_nm && last_nm() >= hi_nm;
  }

  double value_at(double wavelength_nm) const;

  /// Integral over [lo, hi] intersected with the grid, W m^-2.
  double integrate(double lo_nm, double hi_nm) const;
  double total() const { return integrate(first_nm(), last_nm()); }

  /// Integral of s(l) * w(l) using the trapezoidal rule on this grid.
  double weighted_integral(const std::function<double(double)>& weight) const;

  Spectrum scaled(double factor) const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> wavelengths_;
  std::vector<double> values_;
};

/// CSV with header `wavelength_nm,irradiance_w_m2_nm`, ascending rows, LF.
Spectrum read_spectrum_csv(std::istream& in);
Spectrum read_spectrum_csv(const std::filesystem::path& path);
void write_spectrum_csv(std::ostream& out, const Spectrum& s);
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);

}  // namespace solartb
