// SPDX-License-Identifier: Apache-2.0

#include "absplace/channel.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

using namespace absplace;

namespace {

// Frozen from an arbitrary-precision evaluation.
constexpr double kGain100m = -80.0522531132840452;    // lambda = 0.12491 m, d = 100 m
constexpr double kCapacityAt8005 = 238853960.788519620;  // gain -80.05 dB, default link budget
constexpr double kNoiseW = 2.5118864315095801e-13;    // -96 dBm

}  // namespace

TEST_CASE("gain at d = lambda / (4 pi) is 0 dB") {
  ChannelParams p;
  const double d = p.wavelength / (4.0 * std::numbers::pi);
  CHECK(gain_db(p, Point3::Zero(), Point3(0, 0, d), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gain at 100 m for a 2.4 GHz carrier") {
  ChannelParams p;
  p.wavelength = 0.12491;
  CHECK(gain_db(p, Point3::Zero(), Point3(60, 0, 80), 0.0) == doctest::Approx(kGain100m).epsilon(1e-13));
  CHECK(gain_db(p, Point3::Zero(), Point3(60, 0, 80), 4.5) - gain_db(p, Point3::Zero(), Point3(60, 0, 80), 0.0) ==
        doctest::Approx(-4.5).epsilon(1e-12));
  CHECK_THROWS_AS(gain_db(p, Point3(1, 2, 3), Point3(1, 2, 3), 0.0), std::invalid_argument);
}

TEST_CASE("default carrier and noise floor") {
  ChannelParams p;
  CHECK(p.wavelength == doctest::Approx(2.998e8 / 2.4e9).epsilon(1e-15));
  CHECK(p.noise_power == doctest::Approx(kNoiseW).epsilon(1e-14));
  CHECK(dbm_to_watt(-96.0) == doctest::Approx(kNoiseW).epsilon(1e-14));
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
}

TEST_CASE("capacity: unit SNR, vanishing gain, default link budget") {
  ChannelParams p;
  p.tx_power = p.noise_power = 2e-9;
  CHECK(capacity_bps(p, 0.0) == doctest::Approx(p.bandwidth).epsilon(1e-14));
  CHECK(capacity_bps(p, -400.0) < 1e-20);
  CHECK(capacity_bps(ChannelParams{}, -80.05) == doctest::Approx(kCapacityAt8005).epsilon(1e-12));
}

TEST_CASE("capacity increases with gain and gain decreases with distance") {
  ChannelParams p;
  double prev_c = -1.0, prev_g = 1e300;
  for (double d = 1.0; d < 2000.0; d *= 1.3) {
    const double g = gain_db(p, Point3::Zero(), Point3(d, 0, 0), 1.0);
    const double c = capacity_bps(p, g);
    CHECK(g < prev_g);
    CHECK(std::isfinite(c));
    CHECK(c >= 0.0);
    if (prev_c >= 0.0) CHECK(c < prev_c);
    prev_c = c;
    prev_g = g;
  }
}

TEST_CASE("parameters must be finite and positive") {
  ChannelParams p;
  CHECK_NOTHROW(p.validate());
  for (double ChannelParams::*field : {&ChannelParams::wavelength, &ChannelParams::bandwidth, &ChannelParams::tx_power,
                                       &ChannelParams::noise_power, &ChannelParams::min_rate}) {
    ChannelParams bad = p;
    bad.*field = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.*field = INFINITY;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("capacity matrix matches per-entry recomputation") {
  std::mt19937_64 rng(23);
  const RegularGrid3 g(Point3(5, 5, 5), Point3(10, 10, 10), Index3(6, 6, 6));
  const SlfField slf = oracle::random_field(rng, g);
  std::vector<Point3> users, pts;
  for (int i = 0; i < 3; ++i) users.push_back(oracle::random_point_in(rng, g));
  for (int i = 0; i < 5; ++i) pts.push_back(oracle::random_point_in(rng, g));
  ChannelParams p;
  const auto c = build_capacity_matrix(p, users, pts, slf, 1);
  REQUIRE(c.values.rows() == 3);
  REQUIRE(c.values.cols() == 5);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 5; ++k) {
      const double d = (users[m] - pts[k]).norm();
      const double xi = oracle::exact_crossings(slf, users[m], pts[k]);
      const double gain = 20.0 * std::log10(p.wavelength / (4.0 * std::numbers::pi * d)) - xi;
      const double cap = p.bandwidth * std::log2(1.0 + p.tx_power * std::pow(10.0, gain / 10.0) / p.noise_power);
      CHECK(c.values(m, k) == doctest::Approx(cap).epsilon(1e-9));
    }
  // Thread count does not change the result.
  CHECK(build_capacity_matrix(p, users, pts, slf, 4).values == c.values);
}

TEST_CASE("zero field gives free-space capacity; a wall costs exactly its shadowing") {
  const RegularGrid3 g(Point3(0.5, 0.5, 0.5), Point3::Ones(), Index3(20, 3, 3));
  ChannelParams p;
  const Point3 user(0.2, 1.5, 1.5), abs(16.2, 1.5, 1.5);
  const auto free = build_capacity_matrix(p, {user}, {abs}, SlfField(g, 0.0), 1);
  CHECK(free.values(0, 0) == capacity_bps(p, gain_db(p, user, abs, 0.0)));

  // 3 dB/m wall, 4 m thick, crossed by a 16 m path.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  for (int i = 6; i < 10; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) v[static_cast<Eigen::Index>(g.linear(Index3(i, j, k)))] = 3.0;
  const SlfField wall(g, v);
  const double xi = shadowing_line_integral(wall, {user, abs});
  // Path integral 3 * 4 = 12 over length 16, normalized: sqrt(16) * 12 / 16 = 3.
  CHECK(xi == doctest::Approx(3.0).epsilon(1e-12));
  const auto shadowed = build_capacity_matrix(p, {user}, {abs}, wall, 1);
  CHECK(shadowed.values(0, 0) == doctest::Approx(capacity_bps(p, gain_db(p, user, abs, 0.0) - 3.0)).epsilon(1e-14));
}

TEST_CASE("points outside the SLF domain are rejected") {
  const RegularGrid3 g(Point3::Zero(), Point3::Ones(), Index3(3, 3, 3));
  const SlfField slf(g, 0.0);
  CHECK_THROWS_AS(build_capacity_matrix({}, {Point3(0, 0, 0)}, {Point3(9, 0, 0)}, slf), DomainError);
  CHECK_THROWS_AS(build_capacity_matrix({}, {Point3(0, -1, 0)}, {Point3(1, 0, 0)}, slf), DomainError);
}

TEST_CASE("pruning zero columns keeps an index map") {
  CapacityMatrix c;
  c.values = Eigen::MatrixXd::Ones(2, 4);
  auto same = prune_zero_columns(c);
  CHECK(same.retained == std::vector<Eigen::Index>{0, 1, 2, 3});
  CHECK(same.matrix.values == c.values);

  c.values.col(2).setZero();
  auto pruned = prune_zero_columns(c);
  CHECK(pruned.retained == std::vector<Eigen::Index>{0, 1, 3});
  CHECK(pruned.matrix.values.cols() == 3);

  c.values.setZero();
  CHECK_THROWS_AS(prune_zero_columns(c), std::runtime_error);
  CHECK_THROWS_AS(prune_zero_columns(c, -1.0), std::invalid_argument);
}

TEST_CASE("capacity CSV has a header and one row per user") {
  CapacityMatrix c;
  c.values = (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4.5).finished();
  std::ostringstream os;
  write_capacity_csv(os, c);
  CHECK(os.str() == "user,g0,g1\n0,1,2\n1,3,4.5\n");
}

TEST_CASE("worker count honours the environment cap") {
  ::setenv("ABSPLACE_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  ::setenv("ABSPLACE_THREADS", "junk", 1);
  CHECK(worker_threads() >= 1);
  ::unsetenv("ABSPLACE_THREADS");
  CHECK(worker_threads() >= 1);
}
