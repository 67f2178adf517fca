// SPDX-License-Identifier: Apache-2.0
//
// Points, regular 3D grids, boxes and segments shared by every module.

#ifndef ABSPLACE_GEOMETRY_HPP
#define ABSPLACE_GEOMETRY_HPP

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace absplace {

using Point3 = Eigen::Vector3d;
using Index3 = Eigen::Array3i;

/// Raised when a point or segment lies outside the domain of a grid.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Regular grid: point i sits at origin + i * spacing (component-wise).
///
/// Each grid point owns the voxel [p - spacing/2, p + spacing/2]; the union
/// of all voxels is the grid's voxel domain.
class RegularGrid3 {
 public:
  RegularGrid3() = default;
  RegularGrid3(const Point3& origin, const Eigen::Vector3d& spacing, const Index3& dims);

  const Point3& origin() const { return origin_; }
  const Eigen::Vector3d& spacing() const { return spacing_; }
  const Index3& dims() const { return dims_; }
  std::size_t size() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }

  /// Coordinates of grid point `index`. Throws std::out_of_range.
  Point3 point(const Index3& index) const;
  /// Coordinates of the grid point with linear index `linear` (x fastest).
  Point3 point(std::size_t linear) const { return point(unravel(linear)); }

  bool in_bounds(const Index3& index) const {
    return (index >= 0).all() && (index < dims_).all();
  }

  /// x-major linear index: x varies fastest, then y, then z.
  std::size_t linear(const Index3& index) const {
    return static_cast<std::size_t>(index[0]) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(index[1]) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(index[2]));
  }
  Index3 unravel(std::size_t linear) const;

  /// Voxel-domain corners: origin - spacing/2 and origin + (dims - 1/2) * spacing.
  Point3 domain_min() const { return origin_ - 0.5 * spacing_; }
  Point3 domain_max() const {
    return origin_ + ((dims_.cast<double>() - 0.5) * spacing_.array()).matrix();
  }
  bool contains(const Point3& p) const;

  /// Index of the voxel around the grid point nearest to `p`.
  ///
  /// Ties on interior voxel faces round half away from zero in grid-local
  /// coordinates; points on the outer faces of the domain map to the adjacent
  /// boundary voxel. Throws DomainError outside the voxel domain.
  Index3 containing_voxel(const Point3& p) const;

 private:
  Point3 origin_ = Point3::Zero();
  Eigen::Vector3d spacing_ = Eigen::Vector3d::Ones();
  Index3 dims_ = Index3::Ones();
};

/// Free-function spelling used throughout the CLI and tests.
inline Point3 grid_point(const RegularGrid3& grid, const Index3& index) {
  return grid.point(index);
}
inline Index3 containing_voxel(const RegularGrid3& grid, const Point3& p) {
  return grid.containing_voxel(p);
}

/// Axis-aligned box (buildings, no-fly volumes).
struct Box3 {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  Box3() = default;
  Box3(const Point3& lo, const Point3& hi);

  /// Closed containment test.
  bool contains(const Point3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  /// Open containment in x,y only (footprint interior).
  bool footprint_contains(double x, double y) const {
    return x > min.x() && x < max.x() && y > min.y() && y < max.y();
  }
};

struct Segment3 {
  Point3 a = Point3::Zero();
  Point3 b = Point3::Zero();

  double length() const { return (b - a).norm(); }
  Point3 at(double t) const { return a + t * (b - a); }
};

std::string to_string(const Point3& p);

}  // namespace absplace

#endif  // ABSPLACE_GEOMETRY_HPP
