// SPDX-License-Identifier: Apache-2.0

#include "absplace/geometry.hpp"

#include <doctest.h>

#include <random>

using namespace absplace;

TEST_CASE("grid_point places index i at origin + i * spacing") {
  CHECK(grid_point(RegularGrid3(Point3::Zero(), Point3::Ones(), Index3(3, 3, 3)), Index3(0, 0, 0)) ==
        Point3(0, 0, 0));
  CHECK(grid_point(RegularGrid3(Point3::Zero(), Point3(2, 3, 4), Index3(3, 3, 3)), Index3(1, 1, 1)) ==
        Point3(2, 3, 4));
  CHECK(grid_point(RegularGrid3(Point3(10, 0, 50), Point3(5, 5, 10), Index3(3, 3, 3)), Index3(2, 0, 1)) ==
        Point3(20, 0, 60));
}

TEST_CASE("grid_point rejects out-of-range indices") {
  const RegularGrid3 g(Point3::Zero(), Point3::Ones(), Index3(2, 3, 4));
  CHECK_THROWS_AS(g.point(Index3(2, 0, 0)), std::out_of_range);
  CHECK_THROWS_AS(g.point(Index3(0, -1, 0)), std::out_of_range);
  CHECK_THROWS_AS(g.point(std::size_t{24}), std::out_of_range);
}

TEST_CASE("grid construction validates spacing, dims and origin") {
  CHECK_THROWS_AS(RegularGrid3(Point3::Zero(), Point3(1, 0, 1), Index3(1, 1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(RegularGrid3(Point3::Zero(), Point3(1, -1, 1), Index3(1, 1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(RegularGrid3(Point3::Zero(), Point3::Ones(), Index3(1, 0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(RegularGrid3(Point3(NAN, 0, 0), Point3::Ones(), Index3(1, 1, 1)), std::invalid_argument);
}

TEST_CASE("linear index is x-fastest and round-trips") {
  const RegularGrid3 g(Point3::Zero(), Point3::Ones(), Index3(3, 4, 5));
  CHECK(g.size() == 60);
  CHECK(g.linear(Index3(1, 0, 0)) == 1);
  CHECK(g.linear(Index3(0, 1, 0)) == 3);
  CHECK(g.linear(Index3(0, 0, 1)) == 12);
  for (std::size_t q = 0; q < g.size(); ++q) CHECK(g.linear(g.unravel(q)) == q);
}

TEST_CASE("containing_voxel picks the nearest grid point") {
  const RegularGrid3 unit(Point3::Zero(), Point3::Ones(), Index3(4, 4, 4));
  CHECK((containing_voxel(unit, Point3(0.4, 0.4, 0.4)) == Index3(0, 0, 0)).all());
  CHECK((containing_voxel(unit, Point3(0.6, 0, 0)) == Index3(1, 0, 0)).all());
  const RegularGrid3 two(Point3::Zero(), Point3(2, 2, 2), Index3(4, 4, 4));
  CHECK((containing_voxel(two, Point3(2.9, 0.9, 0)) == Index3(1, 0, 0)).all());
}

TEST_CASE("containing_voxel ties round away from zero, outer faces clamp") {
  const RegularGrid3 g(Point3::Zero(), Point3::Ones(), Index3(3, 3, 3));
  CHECK((g.containing_voxel(Point3(0.5, 1.5, 0)) == Index3(1, 2, 0)).all());
  CHECK((g.containing_voxel(Point3(-0.5, 2.5, 2.5)) == Index3(0, 2, 2)).all());
}

TEST_CASE("containing_voxel rejects points outside the voxel domain") {
  const RegularGrid3 g(Point3(1, 1, 1), Point3::Ones(), Index3(2, 2, 2));
  CHECK_THROWS_AS(g.containing_voxel(Point3(0.49, 1, 1)), DomainError);
  CHECK_THROWS_AS(g.containing_voxel(Point3(1, 1, 2.51)), DomainError);
  CHECK_THROWS_AS(g.containing_voxel(Point3(NAN, 1, 1)), DomainError);
  CHECK_NOTHROW(g.containing_voxel(Point3(0.5, 2.5, 1)));
}

TEST_CASE("containing_voxel inverts grid_point under sub-half-cell perturbations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> frac(-0.4999, 0.4999);
  const RegularGrid3 g(Point3(-3, 2, 7), Point3(0.7, 1.9, 2.3), Index3(5, 4, 6));
  for (std::size_t q = 0; q < g.size(); ++q) {
    const Index3 i = g.unravel(q);
    CHECK((g.containing_voxel(g.point(i)) == i).all());
    const Point3 eps(frac(rng) * 0.7, frac(rng) * 1.9, frac(rng) * 2.3);
    CHECK((g.containing_voxel(g.point(i) + eps) == i).all());
  }
}

TEST_CASE("boxes: closed containment, open footprint, ordered corners") {
  const Box3 b(Point3(0, 0, 0), Point3(2, 3, 4));
  CHECK(b.contains(Point3(2, 3, 4)));
  CHECK_FALSE(b.contains(Point3(2.01, 1, 1)));
  CHECK(b.footprint_contains(1, 1));
  CHECK_FALSE(b.footprint_contains(0, 1));
  CHECK_THROWS_AS(Box3(Point3(1, 0, 0), Point3(0, 1, 1)), std::invalid_argument);
}

TEST_CASE("segment length and interpolation") {
  const Segment3 s{Point3(0, 0, 0), Point3(3, 4, 0)};
  CHECK(s.length() == doctest::Approx(5.0));
  CHECK((s.at(0.5) - Point3(1.5, 2, 0)).norm() < 1e-15);
}
