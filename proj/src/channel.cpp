// SPDX-License-Identifier: Apache-2.0

#include "absplace/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

namespace absplace {

void ChannelParams::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(wavelength)) throw std::invalid_argument("wavelength must be positive");
  if (!positive(bandwidth)) throw std::invalid_argument("bandwidth must be positive");
  if (!positive(tx_power)) throw std::invalid_argument("tx_power must be positive");
  if (!positive(noise_power)) throw std::invalid_argument("noise_power must be positive");
  if (!positive(min_rate)) throw std::invalid_argument("min_rate must be positive");
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double gain_db(const ChannelParams& params, const Point3& gt, const Point3& abs, double shadow) {
  const double d = (gt - abs).norm();
  if (d == 0.0) throw std::invalid_argument("gain undefined for coincident points");
  return 20.0 * std::log10(params.wavelength / (4.0 * std::numbers::pi * d)) - shadow;
}

double capacity_bps(const ChannelParams& params, double gain_db) {
  const double snr = params.tx_power * std::pow(10.0, gain_db / 10.0) / params.noise_power;
  return params.bandwidth * std::log2(1.0 + snr);
}

unsigned worker_threads() {
  if (const char* env = std::getenv("ABSPLACE_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

CapacityMatrix build_capacity_matrix(const ChannelParams& params, const std::vector<Point3>& users,
                                     const std::vector<Point3>& grid_points, const SlfField& slf,
                                     unsigned threads) {
  params.validate();
  CapacityMatrix out;
  out.users = users;
  out.grid_points = grid_points;
  const auto m = static_cast<Eigen::Index>(users.size());
  const auto g = static_cast<Eigen::Index>(grid_points.size());
  out.values.resize(m, g);

  for (const auto& p : users)
    if (!slf.grid().contains(p)) throw DomainError("user " + to_string(p) + " outside SLF grid");
  for (const auto& p : grid_points)
    if (!slf.grid().contains(p)) throw DomainError("grid point " + to_string(p) + " outside SLF grid");

  auto fill_columns = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index col = begin; col < end; ++col)
      for (Eigen::Index row = 0; row < m; ++row) {
        const Point3& u = users[static_cast<std::size_t>(row)];
        const Point3& x = grid_points[static_cast<std::size_t>(col)];
        const double xi = shadowing_line_integral(slf, {u, x});
        out.values(row, col) = capacity_bps(params, gain_db(params, u, x, xi));
      }
  };

  const auto workers = static_cast<Eigen::Index>(std::min<unsigned>(threads ? threads : worker_threads(), 64));
  if (workers <= 1 || g < 2 * workers) {
    fill_columns(0, g);
  } else {
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (g + workers - 1) / workers;
    for (Eigen::Index start = 0; start < g; start += chunk)
      pool.emplace_back(fill_columns, start, std::min(g, start + chunk));
    for (auto& t : pool) t.join();
  }
  return out;
}

PrunedCapacity prune_zero_columns(const CapacityMatrix& c, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("prune threshold must be nonnegative");
  PrunedCapacity out;
  for (Eigen::Index col = 0; col < c.num_points(); ++col)
    if (c.num_users() > 0 && c.values.col(col).maxCoeff() > threshold) out.retained.push_back(col);
  if (out.retained.empty()) throw std::runtime_error("every grid point has zero capacity; empty problem");

  out.matrix.users = c.users;
  out.matrix.values.resize(c.num_users(), static_cast<Eigen::Index>(out.retained.size()));
  for (std::size_t k = 0; k < out.retained.size(); ++k) {
    out.matrix.values.col(static_cast<Eigen::Index>(k)) = c.values.col(out.retained[k]);
    if (!c.grid_points.empty()) out.matrix.grid_points.push_back(c.grid_points[static_cast<std::size_t>(out.retained[k])]);
  }
  return out;
}

void write_capacity_csv(std::ostream& os, const CapacityMatrix& c) {
  os << "user";
  for (Eigen::Index g = 0; g < c.num_points(); ++g) os << ",g" << g;
  os << '\n' << std::setprecision(17);
  for (Eigen::Index m = 0; m < c.num_users(); ++m) {
    os << m;
    for (Eigen::Index g = 0; g < c.num_points(); ++g) os << ',' << c.values(m, g);
    os << '\n';
  }
}

}  // namespace absplace
