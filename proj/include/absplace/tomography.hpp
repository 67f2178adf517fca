// SPDX-License-Identifier: Apache-2.0
//
// Spatial loss fields (SLFs) and the tomographic shadowing integral
//
//   xi(a, b) = |b - a|^{-1/2} * integral of l along the segment a -> b.
//
// The field is piecewise constant over the voxels of a regular grid, so the
// integral reduces to a weighted sum of voxel values with weights equal to
// the normalized length the segment spends inside each voxel. Shadowing is
// reported in the same (dimensionless) units as the gain in dB; an SLF in
// dB/m yields dB * m^{1/2} which we do not track separately.

#ifndef ABSPLACE_TOMOGRAPHY_HPP
#define ABSPLACE_TOMOGRAPHY_HPP

#include "absplace/geometry.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace absplace {

/// SLF values on a regular grid, stored x-major (x fastest, then y, then z).
class SlfField {
 public:
  SlfField() = default;
  explicit SlfField(const RegularGrid3& grid, double fill = 0.0);
  SlfField(const RegularGrid3& grid, Eigen::VectorXd values);

  const RegularGrid3& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  double operator()(const Index3& i) const { return values_[static_cast<Eigen::Index>(grid_.linear(i))]; }
  double& operator()(const Index3& i) { return values_[static_cast<Eigen::Index>(grid_.linear(i))]; }

 private:
  RegularGrid3 grid_;
  Eigen::VectorXd values_;
};

/// One voxel visited by a segment, occupying parameters [t_begin, t_end].
struct TraversalInterval {
  double t_begin = 0.0;
  double t_end = 0.0;
  Index3 voxel = Index3::Zero();

  double length() const { return t_end - t_begin; }
};

struct TraversalResult {
  /// Positive-length intervals in order of increasing t, covering [0, 1].
  std::vector<TraversalInterval> intervals;
  /// sum of interval length * SLF value, i.e. the unnormalized line integral
  /// divided by the segment length. Only filled by shadowing_line_integral.
  double weighted_sum = 0.0;

  /// Crossing parameters t_0 = 0 < t_1 < ... < t_T = 1.
  std::vector<double> crossings() const;
};

/// Voxels crossed by `seg`, with the exact crossing parameters.
///
/// Parametric traversal: from the current voxel, the next boundary crossing
/// along axis j is at t = (spacing_j * (i_j + dir_j / 2) - a_j) / (b_j - a_j);
/// the smallest candidate among axes with nonzero direction wins. The last
/// interval is clamped to end at t = 1. Zero-length segments yield no
/// intervals. Throws DomainError if an endpoint lies outside the grid.
TraversalResult traverse_voxels(const RegularGrid3& grid, const Segment3& seg);

/// |b - a|^{1/2} * sum_i (t_i - t_{i-1}) * L[voxel_i]. Zero-length segments
/// return 0.
double shadowing_line_integral(const SlfField& slf, const Segment3& seg);

/// Conventional approximation: |b - a|^{-1/2} * sum of L over grid points q
/// with |a - x_q| + |x_q - b| <= |a - b| + width / 2.
///
/// Discontinuous in the endpoints and may return 0 on a nonzero field when
/// no grid point falls inside the ellipsoid.
double shadowing_ellipsoid_sum(const SlfField& slf, const Segment3& seg, double width);

struct Measurement {
  Point3 tx = Point3::Zero();
  Point3 rx = Point3::Zero();
  /// Free-space path loss minus measured gain, in dB.
  double shadowing_db = 0.0;
};

struct EstimatorOptions {
  double ridge = 1e-6;
  bool clip_negative = true;
};

/// Sparse row of the linear map L -> xi(L, seg): (linear voxel index, weight).
std::vector<std::pair<std::size_t, double>> integral_weights(const RegularGrid3& grid,
                                                             const Segment3& seg);

/// Ridge least squares: argmin_L sum_j (xi(L, seg_j) - obs_j)^2 + ridge |L|^2.
///
/// With ridge = 0 and a rank-deficient system the minimum-norm minimizer is
/// returned. Negative entries are clipped to 0 afterwards unless disabled.
SlfField estimate_slf(const std::vector<Measurement>& measurements, const RegularGrid3& grid,
                      const EstimatorOptions& options = {});

// Text tensor format:
//   Qx Qy Qz dx dy dz ox oy oz
//   <Qx*Qy*Qz values, x fastest>
void write_slf(std::ostream& os, const SlfField& slf);
SlfField read_slf(std::istream& is);
void save_slf(const std::string& path, const SlfField& slf);
SlfField load_slf(const std::string& path);

// CSV with header tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,shadow_db.
void write_measurements_csv(std::ostream& os, const std::vector<Measurement>& measurements);
std::vector<Measurement> read_measurements_csv(std::istream& is);

}  // namespace absplace

#endif  // ABSPLACE_TOMOGRAPHY_HPP
