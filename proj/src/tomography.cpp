// SPDX-License-Identifier: Apache-2.0

#include "absplace/tomography.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace absplace {

SlfField::SlfField(const RegularGrid3& grid, double fill)
    : grid_(grid), values_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), fill)) {}

SlfField::SlfField(const RegularGrid3& grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size())
    throw std::invalid_argument("SLF tensor size does not match grid dims");
  if (!values_.allFinite()) throw std::invalid_argument("SLF values must be finite");
}

std::vector<double> TraversalResult::crossings() const {
  std::vector<double> t;
  t.reserve(intervals.size() + 1);
  if (intervals.empty()) return t;
  t.push_back(intervals.front().t_begin);
  for (const auto& iv : intervals) t.push_back(iv.t_end);
  return t;
}

namespace {

// Walks the voxels crossed by seg and calls visit(t_begin, t_end, voxel) for
// each positive-length interval. Returns false for zero-length segments.
template <typename Visitor>
bool walk_voxels(const RegularGrid3& grid, const Segment3& seg, Visitor&& visit) {
  if (!grid.contains(seg.a) || !grid.contains(seg.b))
    throw DomainError("segment " + to_string(seg.a) + " -> " + to_string(seg.b) +
                      " leaves the grid voxel domain");
  const Eigen::Vector3d delta = seg.b - seg.a;
  if ((delta.array() == 0.0).all()) return false;

  const Eigen::Vector3d start = seg.a - grid.origin();
  const Eigen::Vector3d& spacing = grid.spacing();
  Index3 dir;
  Eigen::Vector3d safe_delta;
  for (int j = 0; j < 3; ++j) {
    dir[j] = delta[j] > 0.0 ? 1 : (delta[j] < 0.0 ? -1 : 0);
    // Only guards the division; axes with dir == 0 never produce a crossing.
    safe_delta[j] = dir[j] == 0 ? 1.0 : delta[j];
  }

  Index3 current = grid.containing_voxel(seg.a);
  double t = 0.0;
  while (true) {
    double t_next = std::numeric_limits<double>::infinity();
    int axis = -1;
    for (int j = 0; j < 3; ++j) {
      if (dir[j] == 0) continue;
      const double cand = (spacing[j] * (current[j] + 0.5 * dir[j]) - start[j]) / safe_delta[j];
      if (cand < t_next) {
        t_next = cand;
        axis = j;
      }
    }
    if (axis < 0 || t_next >= 1.0) {
      if (1.0 > t) visit(t, 1.0, current);
      break;
    }
    Index3 next = current;
    next[axis] += dir[axis];
    if (!grid.in_bounds(next)) {
      // Rounding left a sliver past the last face; it belongs to this voxel.
      if (1.0 > t) visit(t, 1.0, current);
      break;
    }
    if (t_next > t) {
      visit(t, t_next, current);
      t = t_next;
    }
    current = next;
  }
  return true;
}

}  // namespace

TraversalResult traverse_voxels(const RegularGrid3& grid, const Segment3& seg) {
  TraversalResult out;
  walk_voxels(grid, seg, [&](double t0, double t1, const Index3& voxel) {
    out.intervals.push_back({t0, t1, voxel});
  });
  return out;
}

double shadowing_line_integral(const SlfField& slf, const Segment3& seg) {
  const RegularGrid3& grid = slf.grid();
  const Eigen::VectorXd& values = slf.values();
  double sum = 0.0;
  const bool nonzero = walk_voxels(grid, seg, [&](double t0, double t1, const Index3& voxel) {
    sum += (t1 - t0) * values[static_cast<Eigen::Index>(grid.linear(voxel))];
  });
  if (!nonzero) return 0.0;
  return std::sqrt(seg.length()) * sum;
}

double shadowing_ellipsoid_sum(const SlfField& slf, const Segment3& seg, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("ellipsoid width must be positive");
  const double d = seg.length();
  if (d == 0.0) return 0.0;
  const RegularGrid3& grid = slf.grid();
  const double bound = d + 0.5 * width;
  double sum = 0.0;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const Point3 x = grid.point(q);
    if ((seg.a - x).norm() + (x - seg.b).norm() <= bound) sum += slf.values()[static_cast<Eigen::Index>(q)];
  }
  return sum / std::sqrt(d);
}

std::vector<std::pair<std::size_t, double>> integral_weights(const RegularGrid3& grid,
                                                             const Segment3& seg) {
  std::vector<std::pair<std::size_t, double>> row;
  const double scale = std::sqrt(seg.length());
  walk_voxels(grid, seg, [&](double t0, double t1, const Index3& voxel) {
    const std::size_t q = grid.linear(voxel);
    // A segment can re-enter a voxel only through floating-point slivers.
    if (!row.empty() && row.back().first == q)
      row.back().second += scale * (t1 - t0);
    else
      row.emplace_back(q, scale * (t1 - t0));
  });
  return row;
}

SlfField estimate_slf(const std::vector<Measurement>& measurements, const RegularGrid3& grid,
                      const EstimatorOptions& options) {
  if (measurements.empty()) throw std::invalid_argument("estimate_slf needs at least one measurement");
  if (!(options.ridge >= 0.0)) throw std::invalid_argument("ridge must be nonnegative");

  const auto rows = static_cast<Eigen::Index>(measurements.size());
  const auto q = static_cast<Eigen::Index>(grid.size());
  const bool regularized = options.ridge > 0.0;

  // Stacked system [A; sqrt(ridge) I] L = [y; 0].
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows + (regularized ? q : 0), q);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index j = 0; j < rows; ++j) {
    const auto& m = measurements[static_cast<std::size_t>(j)];
    if (m.tx == m.rx) throw std::invalid_argument("measurement with coincident tx and rx");
    for (const auto& [col, w] : integral_weights(grid, {m.tx, m.rx}))
      a(j, static_cast<Eigen::Index>(col)) += w;
    y[j] = m.shadowing_db;
  }
  if (regularized) a.bottomRows(q).diagonal().setConstant(std::sqrt(options.ridge));

  // Complete orthogonal decomposition gives the minimum-norm solution when
  // the unregularized system is rank deficient.
  Eigen::VectorXd values = a.completeOrthogonalDecomposition().solve(y);
  if (options.clip_negative) values = values.cwiseMax(0.0);
  return SlfField(grid, std::move(values));
}

void write_slf(std::ostream& os, const SlfField& slf) {
  const auto& g = slf.grid();
  os << std::setprecision(17);
  os << g.dims()[0] << ' ' << g.dims()[1] << ' ' << g.dims()[2] << ' ' << g.spacing()[0] << ' '
     << g.spacing()[1] << ' ' << g.spacing()[2] << ' ' << g.origin()[0] << ' ' << g.origin()[1]
     << ' ' << g.origin()[2] << '\n';
  const auto& v = slf.values();
  const int nx = g.dims()[0];
  for (Eigen::Index i = 0; i < v.size(); ++i)
    os << v[i] << (((i + 1) % nx == 0) ? '\n' : ' ');
}

SlfField read_slf(std::istream& is) {
  Index3 dims;
  Eigen::Vector3d spacing;
  Point3 origin;
  if (!(is >> dims[0] >> dims[1] >> dims[2] >> spacing[0] >> spacing[1] >> spacing[2] >>
        origin[0] >> origin[1] >> origin[2]))
    throw std::runtime_error("malformed SLF header");
  RegularGrid3 grid(origin, spacing, dims);
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!(is >> values[i])) throw std::runtime_error("SLF file truncated");
  return SlfField(grid, std::move(values));
}

void save_slf(const std::string& path, const SlfField& slf) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_slf(os, slf);
}

SlfField load_slf(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_slf(is);
}

void write_measurements_csv(std::ostream& os, const std::vector<Measurement>& measurements) {
  os << "tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,shadow_db\n" << std::setprecision(17);
  for (const auto& m : measurements)
    os << m.tx.x() << ',' << m.tx.y() << ',' << m.tx.z() << ',' << m.rx.x() << ',' << m.rx.y()
       << ',' << m.rx.z() << ',' << m.shadowing_db << '\n';
}

std::vector<Measurement> read_measurements_csv(std::istream& is) {
  std::vector<Measurement> out;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("tx_x", 0) == 0) continue;
    }
    std::istringstream ls(line);
    double f[7];
    for (int i = 0; i < 7; ++i) {
      std::string cell;
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("measurement row needs 7 fields: " + line);
      f[i] = std::stod(cell);
    }
    out.push_back({Point3(f[0], f[1], f[2]), Point3(f[3], f[4], f[5]), f[6]});
  }
  return out;
}

}  // namespace absplace
