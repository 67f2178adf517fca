// SPDX-License-Identifier: Apache-2.0
//
// Air-to-ground channel: free-space gain minus tomographic shadowing, Shannon
// capacity, and the user-by-gridpoint capacity matrix.

#ifndef ABSPLACE_CHANNEL_HPP
#define ABSPLACE_CHANNEL_HPP

#include "absplace/geometry.hpp"
#include "absplace/tomography.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace absplace {

inline constexpr double kSpeedOfLight = 2.998e8;

/// Frequency-flat downlink parameters. Powers are totals over the band.
struct ChannelParams {
  double wavelength = kSpeedOfLight / 2.4e9;  // m
  double bandwidth = 20e6;                    // Hz
  double tx_power = 0.1;                      // W
  double noise_power = 1e-3 * 2.5118864315095822e-10;  // -96 dBm in W
  double min_rate = 5e6;                      // bit/s

  /// Throws std::invalid_argument unless every field is finite and positive.
  void validate() const;
};

double dbm_to_watt(double dbm);

/// 20 log10(wavelength / (4 pi |gt - abs|)) - shadow.
double gain_db(const ChannelParams& params, const Point3& gt, const Point3& abs, double shadow);

/// bandwidth * log2(1 + tx_power * 10^(gain/10) / noise_power).
double capacity_bps(const ChannelParams& params, double gain_db);

/// M x G capacities between users and the points of a flight grid.
struct CapacityMatrix {
  Eigen::MatrixXd values;            // bit/s, rows = users, cols = grid points
  std::vector<Point3> users;
  std::vector<Point3> grid_points;

  Eigen::Index num_users() const { return values.rows(); }
  Eigen::Index num_points() const { return values.cols(); }
};

/// Entry (m, g) = capacity_bps(gain_db(params, user_m, point_g, xi(user_m, point_g))).
/// Columns are filled in parallel on `threads` workers (0 = worker_threads()).
CapacityMatrix build_capacity_matrix(const ChannelParams& params, const std::vector<Point3>& users,
                                     const std::vector<Point3>& grid_points, const SlfField& slf,
                                     unsigned threads = 0);

struct PrunedCapacity {
  CapacityMatrix matrix;
  /// retained[new column] = original column.
  std::vector<Eigen::Index> retained;
};

/// Drops columns whose largest entry is <= threshold.
PrunedCapacity prune_zero_columns(const CapacityMatrix& c, double threshold = 0.0);

/// Row per user, column per grid point, values in bit/s.
void write_capacity_csv(std::ostream& os, const CapacityMatrix& c);

/// Worker cap from ABSPLACE_THREADS, else hardware concurrency (at least 1).
unsigned worker_threads();

}  // namespace absplace

#endif  // ABSPLACE_CHANNEL_HPP
