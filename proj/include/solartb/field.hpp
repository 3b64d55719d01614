#pragma once

// Irradiance distribution on the DUT plane inside the reflective enclosure.
//
// Each LED site is a Lambertian emitter facing down. Every wall contributes
// one mirror image of the emitter array, weighted by its reflectance (one
// bounce). The front wall carries the access door, so its effective
// reflectance mixes door and wall by `door_fraction`.

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace solartb {

enum class Wall : int { Left = 0, Right = 1, Rear = 2, Front = 3 };

struct ChamberGeometry {
  double interior_w_mm = 350.0;  // x
  double interior_d_mm = 350.0;  // y; front (door) at -d/2
  double interior_h_mm = 400.0;  // z; LED plane at the top
  double led_span_mm = 340.0;
  int led_grid_n = 26;
  double dut_plane_z_mm = 20.0;
  double test_area_mm = 165.0;
  /// Left, right, rear, front.
  std::array<double, 4> wall_reflectance{0.95, 0.95, 0.95, 0.95};
  double door_reflectance = 0.90;
  /// Share of the front wall taken by the door.
  double door_fraction = 0.8;
  /// Relative field (row-major, rows from front to rear) that replaces the
  /// optical model for scans when present.
  std::optional<std::vector<double>> field_override;

  /// Throws Error(Config) on reflectances outside [0, 1], a DUT plane at or
  /// above the LED plane, or non-positive dimensions.
  void validate() const;
  double front_reflectance() const;
};

/// Total irradiance samples on an n x n grid, row-major; row 0 is the front
/// (door side, most negative y).
struct IrradianceField {
  int grid_n = 0;
  std::vector<double> x_mm;
  std::vector<double> y_mm;
  std::vector<double> values_w_m2;

  double at(int row, int col) const { return values_w_m2[static_cast<std::size_t>(row * grid_n + col)]; }
  double mean() const;
};

struct PointSource {
  double x_mm;
  double y_mm;
  double weight;
};

struct FieldPoint {
  double x_mm;
  double y_mm;
};

/// Cell-centre sample positions of an n x n grid over the square test area.
std::vector<double> grid_axis(double test_area_mm, int grid_n);

namespace kernels {

/// Reference implementation: sum over sources of w * h^2 / r^4.
void field_serial(std::span<const PointSource> sources, double height_mm,
                  std::span<const FieldPoint> points, std::span<double> out);

/// OpenMP version of field_serial, parallel over field points.
void field_omp(std::span<const PointSource> sources, double height_mm,
               std::span<const FieldPoint> points, std::span<double> out);

}  // namespace kernels

/// Emitter array plus first-order wall images for a fixed geometry.
class FieldModel {
 public:
  explicit FieldModel(const ChamberGeometry& geometry);

  const ChamberGeometry& geometry() const { return geometry_; }
  std::span<const PointSource> sources() const { return sources_; }
  double height_mm() const { return height_mm_; }

  /// Unnormalized irradiance at the given points.
  std::vector<double> raw(std::span<const FieldPoint> points, bool parallel = true) const;

  /// Field relative to the mean of the reference 8 x 8 test-area grid.
  double relative_at(double x_mm, double y_mm) const;

  /// Grid scaled so its mean equals `total_w_m2`.
  IrradianceField field(double total_w_m2, int grid_n, bool parallel = true) const;

 private:
  ChamberGeometry geometry_;
  std::vector<PointSource> sources_;
  double height_mm_ = 0.0;
  double reference_mean_ = 1.0;
};

/// Throws Error(OutOfRange) for grid_n < 2.
IrradianceField irradiance_field(const ChamberGeometry& geometry, double total_w_m2, int grid_n);

}  // namespace solartb
