// SPDX-License-Identifier: Apache-2.0

#include "absplace/placement.hpp"
#include "absplace/reference.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <limits>
#include <random>

using namespace absplace;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_capacity(std::mt19937_64& rng, int m, int g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd c(m, g);
  for (int i = 0; i < m; ++i) {
    do {
      for (int j = 0; j < g; ++j) c(i, j) = u(rng) < 0.4 ? 0.0 : 1.2 * u(rng);
    } while (c.row(i).sum() < 1.0);
  }
  return c;
}

}  // namespace

TEST_CASE("simplex: two-variable inequality LP") {
  LpProblem lp;
  lp.objective = VectorXd::Constant(2, -1.0);
  lp.ub_matrix = (MatrixXd(2, 2) << 1, 2, 3, 1).finished();
  lp.ub_rhs = (VectorXd(2) << 4, 6).finished();
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.certified());
  CHECK(sol.objective == doctest::Approx(-2.8));
  CHECK(sol.x[0] == doctest::Approx(1.6));
  CHECK(sol.x[1] == doctest::Approx(1.2));
  CHECK(sol.dual_objective == doctest::Approx(-2.8));
}

TEST_CASE("simplex: equality with upper bounds") {
  LpProblem lp;
  lp.objective = (VectorXd(3) << 1, 2, 3).finished();
  lp.eq_matrix = MatrixXd::Ones(1, 3);
  lp.eq_rhs = VectorXd::Constant(1, 2.0);
  lp.upper = VectorXd::Ones(3);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.certified());
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.x[2] == doctest::Approx(0.0));
}

TEST_CASE("simplex: negative right-hand side, infeasible and unbounded problems") {
  LpProblem ge;
  ge.objective = VectorXd::Ones(1);
  ge.ub_matrix = -MatrixXd::Ones(1, 1);
  ge.ub_rhs = VectorXd::Constant(1, -2.0);
  const auto s1 = solve_lp(ge);
  REQUIRE(s1.certified());
  CHECK(s1.x[0] == doctest::Approx(2.0));

  LpProblem inf;
  inf.objective = VectorXd::Ones(2);
  inf.eq_matrix = MatrixXd::Ones(1, 2);
  inf.eq_rhs = VectorXd::Constant(1, 3.0);
  inf.upper = VectorXd::Ones(2);
  CHECK(solve_lp(inf).status == LpStatus::kInfeasible);
  CHECK_FALSE(solve_lp(inf).certified());

  LpProblem unb;
  unb.objective = (VectorXd(2) << -1, 0).finished();
  unb.ub_matrix = (MatrixXd(1, 2) << 1, -1).finished();
  unb.ub_rhs = VectorXd::Ones(1);
  CHECK(solve_lp(unb).status == LpStatus::kUnbounded);
}

TEST_CASE("simplex terminates on a classic cycling example") {
  LpProblem lp;
  lp.objective = (VectorXd(4) << -0.75, 20, -0.5, 6).finished();
  lp.ub_matrix = (MatrixXd(3, 4) << 0.25, -8, -1, 9, 0.5, -12, -0.5, 3, 0, 0, 1, 0).finished();
  lp.ub_rhs = (VectorXd(3) << 0, 0, 1).finished();
  const auto sol = solve_lp(lp);
  REQUIRE(sol.certified());
  CHECK(sol.objective == doctest::Approx(-1.25));
}

TEST_CASE("simplex on a box: optimum is the sum of negative costs") {
  std::mt19937_64 rng(67);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    LpProblem lp;
    lp.objective = VectorXd::NullaryExpr(12, [&] { return nd(rng); });
    lp.upper = VectorXd::Ones(12);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.certified());
    CHECK(sol.objective == doctest::Approx(lp.objective.cwiseMin(0.0).sum()));
  }
}

TEST_CASE("LP dimension checks") {
  LpProblem lp;
  lp.objective = VectorXd::Ones(2);
  lp.eq_matrix = MatrixXd::Ones(1, 3);
  lp.eq_rhs = VectorXd::Ones(1);
  CHECK_THROWS_AS(solve_lp(lp), std::invalid_argument);
  lp.eq_matrix = MatrixXd::Ones(1, 2);
  lp.upper = -VectorXd::Ones(2);
  CHECK_THROWS_AS(solve_lp(lp), std::invalid_argument);
}

TEST_CASE("exhaustive search: disjoint cover, lexicographic witness, guard") {
  const MatrixXd eye = 2.0 * MatrixXd::Identity(4, 4);
  const auto d = exhaustive_min_abs(eye, 1.0);
  CHECK(d.count == 4);
  CHECK(d.subset == std::vector<Eigen::Index>{0, 1, 2, 3});

  MatrixXd c(2, 4);
  c << 0, 1, 1, 1,
       0, 1, 1, 1;
  const auto e = exhaustive_min_abs(c, 1.0);
  CHECK(e.count == 1);
  CHECK(e.subset == std::vector<Eigen::Index>{1});
  CHECK(e.subsets_checked == 2);

  CHECK_THROWS_AS(exhaustive_min_abs(MatrixXd::Ones(2, 26), 1.0), GuardError);
  CHECK_NOTHROW(exhaustive_min_abs(MatrixXd::Ones(2, 25), 1.0));
  CHECK_THROWS_AS(exhaustive_min_abs(MatrixXd::Constant(2, 3, 0.1), 1.0), InfeasibleError);
}

TEST_CASE("exhaustive search matches bitmask enumeration") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> md(1, 6), gd(1, 12);
  for (int t = 0; t < 200; ++t) {
    const MatrixXd c = random_capacity(rng, md(rng), gd(rng));
    const auto ex = exhaustive_min_abs(c, 1.0);
    CHECK(ex.count == oracle::bitmask_min_cover(c, 1.0));
    CHECK(covers(c, ex.subset, 1.0));
  }
}

TEST_CASE("epigraph LP: forced allocation, lower bound on the exhaustive count") {
  MatrixXd one(1, 1);
  one << 3e6;
  const auto f = solve_epigraph_lp(one, 1e6, VectorXd::Ones(1));
  CHECK(f.objective == doctest::Approx(1e6));
  CHECK(f.rates(0, 0) == doctest::Approx(1e6));

  std::mt19937_64 rng(73);
  for (int t = 0; t < 30; ++t) {
    const MatrixXd c = random_capacity(rng, 3, 8);
    const auto lp = solve_epigraph_lp(c, 1.0, VectorXd::Ones(8));
    REQUIRE(lp.lp.certified());
    CHECK(lp.objective <= oracle::bitmask_min_cover(c, 1.0) + 1e-9);
    CHECK(((lp.rates.rowwise().sum().array() - 1.0).abs() <= 1e-9).all());
    CHECK((lp.rates.array() <= c.array() + 1e-9).all());
    for (Eigen::Index g = 0; g < 8; ++g) CHECK((lp.rates.col(g).array() <= lp.slack[g] + 1e-9).all());
  }
  CHECK_THROWS_AS(solve_epigraph_lp(one, 4e6, VectorXd::Ones(1)), InfeasibleError);
  CHECK_THROWS_AS(solve_epigraph_lp(one, 1e6, VectorXd::Ones(2)), std::invalid_argument);
}

TEST_CASE("alpha LP rounds to a feasible cover no smaller than the optimum") {
  std::mt19937_64 rng(79);
  for (int t = 0; t < 30; ++t) {
    const MatrixXd c = 5e6 * random_capacity(rng, 4, 10);
    const auto res = solve_alpha_lp(c, 5e6);
    CHECK(res.rounds.size() == 4);
    for (const auto& r : res.rounds) CHECK(r.certified());
    CHECK(covers(c, res.selected, 5e6));
    CHECK(static_cast<int>(res.selected.size()) >= oracle::bitmask_min_cover(c, 5e6));
  }
  CHECK_THROWS_AS(solve_alpha_lp(MatrixXd::Ones(1, 1), 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(solve_alpha_lp(MatrixXd::Ones(1, 1), 2.0), InfeasibleError);
}
