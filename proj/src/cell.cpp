#include "qbm/cell.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbm/error.hpp"

namespace qbm {

namespace {

double cross(PhasePoint o, PhasePoint a, PhasePoint b) {
  return (a.q - o.q) * (b.p - o.p) - (a.p - o.p) * (b.q - o.q);
}

bool segments_intersect(PhasePoint a, PhasePoint b, PhasePoint c, PhasePoint d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

double signed_area(const std::vector<PhasePoint>& poly) {
  double acc = 0.0;
  const auto n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    acc += a.q * b.p - b.q * a.p;
  }
  return 0.5 * acc;
}

bool is_simple(const std::vector<PhasePoint>& poly) {
  const auto n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = poly[i];
    const auto b = poly[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<PhasePoint> remove_collinear(const std::vector<PhasePoint>& poly, double rel_tol) {
  if (poly.size() <= 3) return poly;
  double scale = 0.0;
  for (const auto& v : poly) scale = std::max({scale, std::abs(v.q), std::abs(v.p)});
  std::vector<PhasePoint> out;
  const auto n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& prev = poly[(i + n - 1) % n];
    const auto& next = poly[(i + 1) % n];
    const double len = std::hypot(next.q - prev.q, next.p - prev.p);
    if (std::abs(cross(prev, poly[i], next)) > rel_tol * std::max(scale, 1.0) * len) {
      out.push_back(poly[i]);
    }
  }
  return out.size() >= 3 ? out : poly;
}

PhaseSpaceCell PhaseSpaceCell::rectangle(double q1, double q2, double p1, double p2) {
  if (!(q1 < q2) || !(p1 < p2)) {
    throw Error(ErrorKind::geometry, "rectangle cell requires q1 < q2 and p1 < p2");
  }
  PhaseSpaceCell c;
  c.rect_ = Rectangle{q1, q2, p1, p2};
  c.vertices_ = {{q1, p1}, {q2, p1}, {q2, p2}, {q1, p2}};
  c.length_scale_ = q2 - q1;
  c.momentum_scale_ = p2 - p1;
  c.volume_ = (q2 - q1) * (p2 - p1);
  return c;
}

PhaseSpaceCell PhaseSpaceCell::polygon(std::vector<PhasePoint> vertices,
                                       std::optional<double> length_scale,
                                       std::optional<double> momentum_scale) {
  if (vertices.size() < 3) throw Error(ErrorKind::geometry, "polygon cell needs at least 3 vertices");
  double area = signed_area(vertices);
  if (area < 0.0) {
    std::reverse(vertices.begin(), vertices.end());
    area = -area;
  }
  if (!(area > 0.0)) throw Error(ErrorKind::geometry, "polygon cell has zero area");
  if (!is_simple(vertices)) throw Error(ErrorKind::geometry, "polygon cell is self-intersecting");
  PhaseSpaceCell c;
  c.vertices_ = std::move(vertices);
  c.volume_ = area;
  const auto box = c.bounding_box();
  c.length_scale_ = length_scale.value_or(box.q2 - box.q1);
  c.momentum_scale_ = momentum_scale.value_or(box.p2 - box.p1);
  return c;
}

PhaseSpaceCell PhaseSpaceCell::with_scales(double length_scale, double momentum_scale) const {
  PhaseSpaceCell c = *this;
  c.length_scale_ = length_scale;
  c.momentum_scale_ = momentum_scale;
  return c;
}

PhasePoint PhaseSpaceCell::centroid() const {
  double cq = 0.0, cp = 0.0, a = 0.0;
  const auto n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v0 = vertices_[i];
    const auto& v1 = vertices_[(i + 1) % n];
    const double w = v0.q * v1.p - v1.q * v0.p;
    a += w;
    cq += (v0.q + v1.q) * w;
    cp += (v0.p + v1.p) * w;
  }
  return {cq / (3.0 * a), cp / (3.0 * a)};
}

Rectangle PhaseSpaceCell::bounding_box() const {
  Rectangle b{vertices_[0].q, vertices_[0].q, vertices_[0].p, vertices_[0].p};
  for (const auto& v : vertices_) {
    b.q1 = std::min(b.q1, v.q);
    b.q2 = std::max(b.q2, v.q);
    b.p1 = std::min(b.p1, v.p);
    b.p2 = std::max(b.p2, v.p);
  }
  return b;
}

double PhaseSpaceCell::perimeter() const {
  double acc = 0.0;
  const auto n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = vertices_[i];
    const auto& b = vertices_[(i + 1) % n];
    acc += std::hypot(b.q - a.q, b.p - a.p);
  }
  return acc;
}

bool PhaseSpaceCell::contains(PhasePoint z) const {
  bool inside = false;
  const auto n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = vertices_[i];
    const auto& b = vertices_[j];
    if ((a.p > z.p) != (b.p > z.p) && z.q < (b.q - a.q) * (z.p - a.p) / (b.p - a.p) + a.q) {
      inside = !inside;
    }
  }
  return inside;
}

std::vector<PhasePoint> PhaseSpaceCell::sample_boundary(int n) const {
  const double step = perimeter() / std::max(n, static_cast<int>(vertices_.size()));
  std::vector<PhasePoint> out;
  const auto nv = vertices_.size();
  for (std::size_t i = 0; i < nv; ++i) {
    const auto& a = vertices_[i];
    const auto& b = vertices_[(i + 1) % nv];
    const double len = std::hypot(b.q - a.q, b.p - a.p);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
    for (int k = 0; k < pieces; ++k) {
      const double t = static_cast<double>(k) / pieces;
      out.push_back({a.q + t * (b.q - a.q), a.p + t * (b.p - a.p)});
    }
  }
  return out;
}

bool PhaseSpaceCell::same_geometry(const PhaseSpaceCell& other, double tol) const {
  if (vertices_.size() != other.vertices_.size()) return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (std::abs(vertices_[i].q - other.vertices_[i].q) > tol ||
        std::abs(vertices_[i].p - other.vertices_[i].p) > tol) {
      return false;
    }
  }
  return true;
}

std::optional<PhaseSpaceCell> intersect(const PhaseSpaceCell& a, const PhaseSpaceCell& b) {
  if (!a.is_rectangle() || !b.is_rectangle()) {
    throw Error(ErrorKind::misuse, "cell intersection is only defined for rectangles");
  }
  const auto& x = a.rect();
  const auto& y = b.rect();
  const double q1 = std::max(x.q1, y.q1), q2 = std::min(x.q2, y.q2);
  const double p1 = std::max(x.p1, y.p1), p2 = std::min(x.p2, y.p2);
  if (!(q1 < q2) || !(p1 < p2)) return std::nullopt;
  return PhaseSpaceCell::rectangle(q1, q2, p1, p2);
}

}  // namespace qbm
