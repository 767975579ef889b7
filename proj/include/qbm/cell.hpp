#pragma once

#include <optional>
#include <vector>

namespace qbm {

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

struct Rectangle {
  double q1 = 0.0;
  double q2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

/// A phase-space region: axis-aligned rectangle or simple polygon, with
/// reference scales L (length) and P (momentum). Polygons are stored
/// counter-clockwise.
class PhaseSpaceCell {
 public:
  static PhaseSpaceCell rectangle(double q1, double q2, double p1, double p2);
  /// Reference scales default to the bounding-box extents.
  static PhaseSpaceCell polygon(std::vector<PhasePoint> vertices,
                                std::optional<double> length_scale = std::nullopt,
                                std::optional<double> momentum_scale = std::nullopt);

  bool is_rectangle() const noexcept { return rect_.has_value(); }
  const Rectangle& rect() const { return *rect_; }
  const std::vector<PhasePoint>& vertices() const noexcept { return vertices_; }

  double length_scale() const noexcept { return length_scale_; }
  double momentum_scale() const noexcept { return momentum_scale_; }
  double volume() const noexcept { return volume_; }

  PhaseSpaceCell with_scales(double length_scale, double momentum_scale) const;

  PhasePoint centroid() const;
  Rectangle bounding_box() const;
  double perimeter() const;
  bool contains(PhasePoint z) const;

  /// Boundary resampled at roughly n points spaced by arc length; every
  /// vertex is kept so corners stay sharp.
  std::vector<PhasePoint> sample_boundary(int n) const;

  bool same_geometry(const PhaseSpaceCell& other, double tol = 1e-12) const;

 private:
  PhaseSpaceCell() = default;

  std::optional<Rectangle> rect_;
  std::vector<PhasePoint> vertices_;
  double length_scale_ = 0.0;
  double momentum_scale_ = 0.0;
  double volume_ = 0.0;
};

double signed_area(const std::vector<PhasePoint>& polygon);
bool is_simple(const std::vector<PhasePoint>& polygon);

/// Drops vertices whose adjacent edges are collinear to relative tolerance.
std::vector<PhasePoint> remove_collinear(const std::vector<PhasePoint>& polygon, double rel_tol = 1e-10);

/// Intersection of two rectangles; nullopt when empty.
std::optional<PhaseSpaceCell> intersect(const PhaseSpaceCell& a, const PhaseSpaceCell& b);

}  // namespace qbm
