// SPDX-License-Identifier: Apache-2.0

#include "absplace/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace absplace {

RegularGrid3::RegularGrid3(const Point3& origin, const Eigen::Vector3d& spacing,
                           const Index3& dims)
    : origin_(origin), spacing_(spacing), dims_(dims) {
  if (!origin.allFinite()) throw std::invalid_argument("grid origin must be finite");
  if (!spacing.allFinite() || (spacing.array() <= 0.0).any())
    throw std::invalid_argument("grid spacing must be strictly positive");
  if ((dims <= 0).any()) throw std::invalid_argument("grid dims must be positive");
}

Point3 RegularGrid3::point(const Index3& index) const {
  if (!in_bounds(index)) throw std::out_of_range("grid index out of bounds");
  return origin_ + (index.cast<double>() * spacing_.array()).matrix();
}

Index3 RegularGrid3::unravel(std::size_t linear) const {
  if (linear >= size()) throw std::out_of_range("linear grid index out of bounds");
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto ny = static_cast<std::size_t>(dims_[1]);
  return Index3(static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny),
                static_cast<int>(linear / (nx * ny)));
}

bool RegularGrid3::contains(const Point3& p) const {
  if (!p.allFinite()) return false;
  return (p.array() >= domain_min().array()).all() && (p.array() <= domain_max().array()).all();
}

Index3 RegularGrid3::containing_voxel(const Point3& p) const {
  if (!contains(p)) throw DomainError("point " + to_string(p) + " outside grid voxel domain");
  Index3 idx;
  for (int a = 0; a < 3; ++a) {
    // std::round rounds half away from zero.
    const double local = (p[a] - origin_[a]) / spacing_[a];
    idx[a] = std::clamp(static_cast<int>(std::round(local)), 0, dims_[a] - 1);
  }
  return idx;
}

Box3::Box3(const Point3& lo, const Point3& hi) : min(lo), max(hi) {
  if ((lo.array() > hi.array()).any()) throw std::invalid_argument("box min must be <= max");
}

std::string to_string(const Point3& p) {
  std::ostringstream os;
  os << '(' << p.x() << ", " << p.y() << ", " << p.z() << ')';
  return os.str();
}

}  // namespace absplace
