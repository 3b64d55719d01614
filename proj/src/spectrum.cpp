#include "solartb/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "solartb/error.hpp"
#include "solartb/format.hpp"

namespace solartb {

Spectrum::Spectrum(std::vector<double> wavelengths_nm, std::vector<double> values_w_m2_nm)
    : wavelengths_(std::move(wavelengths_nm)), values_(std::move(values_w_m2_nm)) {
  if (wavelengths_.size() != values_.size()) {
    throw Error(ErrorKind::InvalidSpectrum, "wavelength and value counts differ");
  }
  if (wavelengths_.size() < 2) {
    throw Error(ErrorKind::InvalidSpectrum, "spectrum needs at least two samples");
  }
  for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
    if (!std::isfinite(wavelengths_[i]) || !std::isfinite(values_[i])) {
      throw Error(ErrorKind::InvalidSpectrum, "non-finite sample");
    }
    if (values_[i] < 0.0) {
      throw Error(ErrorKind::InvalidSpectrum, "negative spectral irradiance");
    }
    if (i > 0 && !(wavelengths_[i] > wavelengths_[i - 1])) {
      throw Error(ErrorKind::InvalidSpectrum, "wavelengths must be strictly increasing");
    }
  }
}

Spectrum Spectrum::sampled(double first_nm, double last_nm, double step_nm,
                           const std::function<double(double)>& f) {
  const auto n = static_cast<std::size_t>(std::llround((last_nm - first_nm) / step_nm)) + 1;
  std::vector<double> wl(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    wl[i] = first_nm + step_nm * static_cast<double>(i);
    v[i] = f(wl[i]);
  }
  return Spectrum(std::move(wl), std::move(v));
}

double Spectrum::value_at(double wavelength_nm) const {
  if (wavelengths_.empty() || wavelength_nm < first_nm() || wavelength_nm > last_nm()) {
    return 0.0;
  }
  auto it = std::upper_bound(wavelengths_.begin(), wavelengths_.end(), wavelength_nm);
  if (it == wavelengths_.end()) return values_.back();
  const auto hi = static_cast<std::size_t>(it - wavelengths_.begin());
  const auto lo = hi - 1;
  const double t = (wavelength_nm - wavelengths_[lo]) / (wavelengths_[hi] - wavelengths_[lo]);
  return values_[lo] + t * (values_[hi] - values_[lo]);
}

double Spectrum::integrate(double lo_nm, double hi_nm) const {
  if (wavelengths_.empty()) return 0.0;
  lo_nm = std::max(lo_nm, first_nm());
  hi_nm = std::min(hi_nm, last_nm());
  if (!(hi_nm > lo_nm)) return 0.0;

  double sum = 0.0;
  double prev_x = lo_nm;
  double prev_y = value_at(lo_nm);
  auto it = std::upper_bound(wavelengths_.begin(), wavelengths_.end(), lo_nm);
  for (; it != wavelengths_.end() && *it < hi_nm; ++it) {
    const auto i = static_cast<std::size_t>(it - wavelengths_.begin());
    sum += 0.5 * (prev_y + values_[i]) * (wavelengths_[i] - prev_x);
    prev_x = wavelengths_[i];
    prev_y = values_[i];
  }
  sum += 0.5 * (prev_y + value_at(hi_nm)) * (hi_nm - prev_x);
  return sum;
}

double Spectrum::weighted_integral(const std::function<double(double)>& weight) const {
  double sum = 0.0;
  double prev = values_.empty() ? 0.0 : values_[0] * weight(wavelengths_[0]);
  for (std::size_t i = 1; i < wavelengths_.size(); ++i) {
    const double cur = values_[i] * weight(wavelengths_[i]);
    sum += 0.5 * (prev + cur) * (wavelengths_[i] - wavelengths_[i - 1]);
    prev = cur;
  }
  return sum;
}

Spectrum Spectrum::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return Spectrum(wavelengths_, std::move(v));
}

Spectrum read_spectrum_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::Io, "spectrum CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "wavelength_nm,irradiance_w_m2_nm") {
    throw Error(ErrorKind::Io, "unexpected spectrum CSV header: " + line);
  }
  std::vector<double> wl, v;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double a = 0, b = 0;
    if (comma == std::string::npos || !parse_double(line.substr(0, comma), a) ||
        !parse_double(line.substr(comma + 1), b)) {
      throw Error(ErrorKind::Io, "malformed spectrum CSV row " + std::to_string(row));
    }
    wl.push_back(a);
    v.push_back(b);
  }
  return Spectrum(std::move(wl), std::move(v));
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_spectrum_csv(in);
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
  out << "wavelength_nm,irradiance_w_m2_nm\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_number(s.wavelengths()[i]) << ',' << format_number(s.values()[i]) << '\n';
  }
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_spectrum_csv(out, s);
}

}  // namespace solartb
