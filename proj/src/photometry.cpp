#include "solartb/photometry.hpp"

#include <array>
#include <cmath>

namespace solartb {

namespace {

// 380..780 nm, 5 nm step.
constexpr std::array<double, 81> kPhotopic{
    0.000039,  0.000064,  0.00012,  0.000217, 0.000396, 0.00064,   0.00121,   0.00218,
    0.004,     0.0073,    0.0116,   0.01684,  0.023,    0.0298,    0.038,     0.048,
    0.06,      0.0739,    0.09098,  0.1126,   0.13902,  0.1693,    0.20802,   0.2586,
    0.323,     0.4073,    0.503,    0.6082,   0.71,     0.7932,    0.862,     0.9148501,
    0.954,     0.9803,    0.9949501, 1.0,     0.995,    0.9786,    0.952,     0.9154,
    0.87,      0.8163,    0.757,    0.6949,   0.631,    0.5668,    0.503,     0.4412,
    0.381,     0.321,     0.265,    0.217,    0.175,    0.1382,    0.107,     0.0816,
    0.061,     0.04458,   0.032,    0.0232,   0.017,    0.01192,   0.00821,   0.005723,
    0.004102,  0.002929,  0.002091, 0.001484, 0.001047, 0.00074,   0.00052,   0.0003611,
    0.0002492, 0.0001719, 0.00012,  0.0000848, 0.00006, 0.0000424, 0.00003,   0.0000212,
    0.00001499};

constexpr double kFirstNm = 380.0;
constexpr double kStepNm = 5.0;

}  // namespace

double photopic_v(double wavelength_nm) {
  const double pos = (wavelength_nm - kFirstNm) / kStepNm;
  if (pos < 0.0 || pos > static_cast<double>(kPhotopic.size() - 1)) return 0.0;
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= kPhotopic.size()) return kPhotopic.back();
  const double t = pos - static_cast<double>(i);
  return kPhotopic[i] + t * (kPhotopic[i + 1] - kPhotopic[i]);
}

double lux_from_spectrum(const Spectrum& s) {
  return kMaxLuminousEfficacy * s.weighted_integral(photopic_v);
}

}  // namespace solartb
