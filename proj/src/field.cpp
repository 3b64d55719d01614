#include "solartb/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "solartb/error.hpp"

namespace solartb {

void ChamberGeometry::validate() const {
  auto unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  for (double r : wall_reflectance) {
    if (!unit(r)) throw Error(ErrorKind::Config, "wall reflectance must be within [0, 1]");
  }
  if (!unit(door_reflectance)) throw Error(ErrorKind::Config, "door reflectance must be within [0, 1]");
  if (!unit(door_fraction)) throw Error(ErrorKind::Config, "door fraction must be within [0, 1]");
  if (!(interior_w_mm > 0.0 && interior_d_mm > 0.0 && interior_h_mm > 0.0)) {
    throw Error(ErrorKind::Config, "chamber dimensions must be positive");
  }
  if (!(dut_plane_z_mm >= 0.0 && dut_plane_z_mm < interior_h_mm)) {
    throw Error(ErrorKind::Config, "DUT plane must lie below the LED plane");
  }
  if (led_grid_n < 1 || !(led_span_mm >= 0.0) || led_span_mm > interior_w_mm ||
      led_span_mm > interior_d_mm) {
    throw Error(ErrorKind::Config, "LED array must fit inside the chamber");
  }
  if (!(test_area_mm > 0.0)) throw Error(ErrorKind::Config, "test area must be positive");
  if (field_override) {
    const auto n = field_override->size();
    std::size_t side = 0;
    while (side * side < n) ++side;
    if (side < 2 || side * side != n) {
      throw Error(ErrorKind::Config, "field override must be a square grid of at least 2 x 2");
    }
    for (double v : *field_override) {
      if (!(v > 0.0)) throw Error(ErrorKind::Config, "field override values must be > 0");
    }
  }
}

double ChamberGeometry::front_reflectance() const {
  return door_fraction * door_reflectance +
         (1.0 - door_fraction) * wall_reflectance[static_cast<int>(Wall::Front)];
}

double IrradianceField::mean() const {
  if (values_w_m2.empty()) return 0.0;
  return std::accumulate(values_w_m2.begin(), values_w_m2.end(), 0.0) /
         static_cast<double>(values_w_m2.size());
}

std::vector<double> grid_axis(double test_area_mm, int grid_n) {
  std::vector<double> axis(static_cast<std::size_t>(grid_n));
  for (int i = 0; i < grid_n; ++i) {
    axis[static_cast<std::size_t>(i)] = ((i + 0.5) / grid_n - 0.5) * test_area_mm;
  }
  return axis;
}

namespace kernels {

namespace {

inline double point_irradiance(std::span<const PointSource> sources, double h2, FieldPoint p) {
  double sum = 0.0;
  for (const auto& s : sources) {
    const double dx = p.x_mm - s.x_mm;
    const double dy = p.y_mm - s.y_mm;
    const double r2 = dx * dx + dy * dy + h2;
    sum += s.weight / (r2 * r2);
  }
  return sum * h2;
}

}  // namespace

void field_serial(std::span<const PointSource> sources, double height_mm,
                  std::span<const FieldPoint> points, std::span<double> out) {
  const double h2 = height_mm * height_mm;
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = point_irradiance(sources, h2, points[i]);
}

void field_omp(std::span<const PointSource> sources, double height_mm,
               std::span<const FieldPoint> points, std::span<double> out) {
  const double h2 = height_mm * height_mm;
  const auto n = static_cast<long>(points.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = point_irradiance(sources, h2, points[static_cast<std::size_t>(i)]);
  }
}

}  // namespace kernels

FieldModel::FieldModel(const ChamberGeometry& geometry) : geometry_(geometry) {
  geometry_.validate();
  height_mm_ = geometry_.interior_h_mm - geometry_.dut_plane_z_mm;

  const int n = geometry_.led_grid_n;
  std::vector<double> axis(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n && n > 1; ++i) {
    axis[static_cast<std::size_t>(i)] = geometry_.led_span_mm * (static_cast<double>(i) / (n - 1) - 0.5);
  }

  const double half_w = 0.5 * geometry_.interior_w_mm;
  const double half_d = 0.5 * geometry_.interior_d_mm;
  const auto& wall = geometry_.wall_reflectance;
  const double front = geometry_.front_reflectance();

  sources_.reserve(static_cast<std::size_t>(5 * n * n));
  for (double y : axis) {
    for (double x : axis) {
      sources_.push_back({x, y, 1.0});
      sources_.push_back({2.0 * half_w - x, y, wall[static_cast<int>(Wall::Right)]});
      sources_.push_back({-2.0 * half_w - x, y, wall[static_cast<int>(Wall::Left)]});
      sources_.push_back({x, 2.0 * half_d - y, wall[static_cast<int>(Wall::Rear)]});
      sources_.push_back({x, -2.0 * half_d - y, front});
    }
  }

  const auto ref = field(1.0, 8, false);
  std::vector<FieldPoint> pts;
  for (double y : ref.y_mm) {
    for (double x : ref.x_mm) pts.push_back({x, y});
  }
  const auto r = raw(pts, false);
  reference_mean_ = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

std::vector<double> FieldModel::raw(std::span<const FieldPoint> points, bool parallel) const {
  std::vector<double> out(points.size());
  if (parallel) {
    kernels::field_omp(sources_, height_mm_, points, out);
  } else {
    kernels::field_serial(sources_, height_mm_, points, out);
  }
  return out;
}

double FieldModel::relative_at(double x_mm, double y_mm) const {
  if (geometry_.field_override) {
    // Nearest cell of the injected grid, relative to its mean.
    const auto& o = *geometry_.field_override;
    int n = 2;
    while (static_cast<std::size_t>(n * n) < o.size()) ++n;
    auto cell = [&](double v) {
      const int i = static_cast<int>(std::floor((v / geometry_.test_area_mm + 0.5) * n));
      return std::clamp(i, 0, n - 1);
    };
    const double mean = std::accumulate(o.begin(), o.end(), 0.0) / static_cast<double>(o.size());
    return o[static_cast<std::size_t>(cell(y_mm) * n + cell(x_mm))] / mean;
  }
  const FieldPoint p{x_mm, y_mm};
  return raw(std::span<const FieldPoint>(&p, 1), false)[0] / reference_mean_;
}

IrradianceField FieldModel::field(double total_w_m2, int grid_n, bool parallel) const {
  if (grid_n < 2) throw Error(ErrorKind::OutOfRange, "grid must be at least 2 x 2");
  IrradianceField f;
  f.grid_n = grid_n;
  f.x_mm = grid_axis(geometry_.test_area_mm, grid_n);
  f.y_mm = f.x_mm;

  std::vector<double> rel;
  if (geometry_.field_override) {
    rel = *geometry_.field_override;
    if (rel.size() != static_cast<std::size_t>(grid_n * grid_n)) {
      throw Error(ErrorKind::Config, "field override size does not match grid " + std::to_string(grid_n));
    }
  } else {
    std::vector<FieldPoint> pts;
    pts.reserve(static_cast<std::size_t>(grid_n * grid_n));
    for (double y : f.y_mm) {
      for (double x : f.x_mm) pts.push_back({x, y});
    }
    rel = raw(pts, parallel);
  }
  const double mean = std::accumulate(rel.begin(), rel.end(), 0.0) / static_cast<double>(rel.size());
  f.values_w_m2.resize(rel.size());
  for (std::size_t i = 0; i < rel.size(); ++i) {
    f.values_w_m2[i] = mean > 0.0 ? total_w_m2 * rel[i] / mean : 0.0;
  }
  return f;
}

IrradianceField irradiance_field(const ChamberGeometry& geometry, double total_w_m2, int grid_n) {
  return FieldModel(geometry).field(total_w_m2, grid_n);
}

}  // namespace solartb
