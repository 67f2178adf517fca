// SPDX-License-Identifier: Apache-2.0

#include "absplace/reference.hpp"

#include "absplace/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace absplace {

void LpProblem::validate() const {
  const Eigen::Index n = num_vars();
  if (eq_matrix.size() && eq_matrix.cols() != n) throw std::invalid_argument("eq_matrix column count");
  if (eq_matrix.rows() != eq_rhs.size()) throw std::invalid_argument("eq_rhs size");
  if (ub_matrix.size() && ub_matrix.cols() != n) throw std::invalid_argument("ub_matrix column count");
  if (ub_matrix.rows() != ub_rhs.size()) throw std::invalid_argument("ub_rhs size");
  if (upper.size() != 0 && upper.size() != n) throw std::invalid_argument("upper bound size");
  if (upper.size() && (upper.array() < 0.0).any()) throw std::invalid_argument("negative upper bound");
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr int kMaxPivots = 200000;

// Dense tableau; row `rows` holds reduced costs, column `cols` the rhs.
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::vector<Eigen::Index> basis)
      : rows_(a.rows()), cols_(a.cols()), t_(a.rows() + 1, a.cols() + 1), basis_(std::move(basis)) {
    t_.topLeftCorner(rows_, cols_) = a;
    t_.topRightCorner(rows_, 1) = b;
    t_.row(rows_).setZero();
  }

  void set_costs(const Eigen::VectorXd& c) {
    t_.row(rows_).head(cols_) = c.transpose();
    t_(rows_, cols_) = 0.0;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double cb = c[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= rows_; ++i)
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    basis_[static_cast<std::size_t>(r)] = c;
    ++pivots_;
  }

  // One Bland's-rule pivot. Returns false at optimality or when `unbounded` is set.
  bool step(Eigen::Index allowed_cols, bool& unbounded) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < allowed_cols; ++j)
      if (t_(rows_, j) < -kCostTol) {
        enter = j;
        break;
      }
    if (enter < 0) return false;
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double aij = t_(i, enter);
      if (aij <= kPivotTol) continue;
      const double ratio = t_(i, cols_) / aij;
      if (ratio < best - 1e-14 ||
          (leave >= 0 && std::abs(ratio - best) <= 1e-14 && basis_[static_cast<std::size_t>(i)] <
                                                  basis_[static_cast<std::size_t>(leave)])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) {
      unbounded = true;
      return false;
    }
    pivot(leave, enter);
    if (pivots_ > kMaxPivots) throw std::runtime_error("simplex pivot limit exceeded");
    return true;
  }

  double value() const { return -t_(rows_, cols_); }
  double entry(Eigen::Index i, Eigen::Index j) const { return t_(i, j); }
  Eigen::Index rows() const { return rows_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  int pivots() const { return pivots_; }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  int pivots_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  problem.validate();
  const Eigen::Index n = problem.num_vars();
  const Eigen::Index n_eq = problem.eq_rhs.size();
  const Eigen::Index n_ub = problem.ub_rhs.size();
  std::vector<Eigen::Index> bounded;
  for (Eigen::Index j = 0; j < problem.upper.size(); ++j)
    if (std::isfinite(problem.upper[j])) bounded.push_back(j);
  const auto n_bd = static_cast<Eigen::Index>(bounded.size());

  // Standard form: [x | ub slacks | bound slacks | artificials].
  const Eigen::Index rows = n_eq + n_ub + n_bd;
  const Eigen::Index n_struct = n + n_ub + n_bd;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n_struct + rows);
  Eigen::VectorXd b(rows);
  if (n_eq) a.block(0, 0, n_eq, n) = problem.eq_matrix, b.head(n_eq) = problem.eq_rhs;
  if (n_ub) {
    a.block(n_eq, 0, n_ub, n) = problem.ub_matrix;
    a.block(n_eq, n, n_ub, n_ub).setIdentity();
    b.segment(n_eq, n_ub) = problem.ub_rhs;
  }
  for (Eigen::Index k = 0; k < n_bd; ++k) {
    a(n_eq + n_ub + k, bounded[static_cast<std::size_t>(k)]) = 1.0;
    a(n_eq + n_ub + k, n + n_ub + k) = 1.0;
    b[n_eq + n_ub + k] = problem.upper[bounded[static_cast<std::size_t>(k)]];
  }

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  Eigen::Index n_art = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (b[i] < 0.0) {
      a.row(i) *= -1.0;
      b[i] = -b[i];
    }
    const bool slack_basic = i >= n_eq && a(i, n + (i - n_eq)) > 0.0;
    if (slack_basic) {
      basis[static_cast<std::size_t>(i)] = n + (i - n_eq);
    } else {
      a(i, n_struct + n_art) = 1.0;
      basis[static_cast<std::size_t>(i)] = n_struct + n_art;
      ++n_art;
    }
  }
  const Eigen::Index total = n_struct + n_art;
  Eigen::MatrixXd std_a = a.leftCols(total);

  Tableau tab(std_a, b, basis);
  LpSolution sol;
  bool unbounded = false;

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
    phase1.tail(n_art).setOnes();
    tab.set_costs(phase1);
    while (tab.step(total, unbounded)) {
    }
    if (tab.value() > 1e-9 * std::max(1.0, b.lpNorm<Eigen::Infinity>())) {
      sol.status = LpStatus::kInfeasible;
      sol.pivots = tab.pivots();
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < n_struct) continue;
      for (Eigen::Index j = 0; j < n_struct; ++j)
        if (std::abs(tab.entry(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
    }
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
  cost.head(n) = problem.objective;
  tab.set_costs(cost);
  unbounded = false;
  while (tab.step(n_struct, unbounded)) {
  }
  sol.pivots = tab.pivots();
  if (unbounded) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  // Recompute the vertex and its dual from the final basis.
  Eigen::MatrixXd basis_matrix(rows, rows);
  Eigen::VectorXd basis_cost(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index j = tab.basis()[static_cast<std::size_t>(i)];
    basis_matrix.col(i) = std_a.col(j);
    basis_cost[i] = cost[j];
  }
  Eigen::VectorXd x_full = Eigen::VectorXd::Zero(total);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
  if (rows > 0) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_matrix);
    const Eigen::VectorXd xb = lu.solve(b);
    for (Eigen::Index i = 0; i < rows; ++i) x_full[tab.basis()[static_cast<std::size_t>(i)]] = xb[i];
    y = lu.transpose().solve(basis_cost);
  }

  sol.status = LpStatus::kOptimal;
  sol.x = x_full.head(n).cwiseMax(0.0);
  sol.objective = problem.objective.dot(sol.x);
  sol.dual_objective = b.dot(y);
  const double scale = std::max(1.0, std::abs(sol.objective));
  sol.duality_gap = std::abs(sol.objective - sol.dual_objective) / scale;
  const Eigen::VectorXd reduced = cost.head(n_struct) - std_a.leftCols(n_struct).transpose() * y;
  sol.dual_infeasibility =
      std::max(0.0, -reduced.minCoeff()) / std::max(1.0, problem.objective.lpNorm<Eigen::Infinity>());
  sol.primal_infeasibility = std::max((std_a * x_full - b).lpNorm<Eigen::Infinity>(),
                                      std::max(0.0, -x_full.minCoeff()));
  return sol;
}

ExhaustiveResult exhaustive_min_abs(const Eigen::MatrixXd& capacity, double min_rate) {
  const Eigen::Index g = capacity.cols();
  if (g > kExhaustiveMaxPoints)
    throw GuardError("exhaustive search limited to " + std::to_string(kExhaustiveMaxPoints) +
                     " grid points, got " + std::to_string(g));
  if (auto bad = uncoverable_users(capacity, min_rate); !bad.empty()) throw InfeasibleError(bad);

  ExhaustiveResult out;
  Eigen::VectorXd total(capacity.rows());
  for (Eigen::Index k = 1; k <= g; ++k) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    while (true) {
      ++out.subsets_checked;
      total.setZero();
      for (auto j : idx) total += capacity.col(j);
      if ((total.array() >= min_rate).all()) {
        out.count = static_cast<int>(k);
        out.subset = idx;
        return out;
      }
      // Next combination in lexicographic order.
      auto i = static_cast<Eigen::Index>(k) - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == g - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (auto j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  throw InfeasibleError({});  // unreachable: all columns together cover every user
}

EpigraphLpResult solve_epigraph_lp(const Eigen::MatrixXd& capacity, double min_rate,
                                   const Eigen::VectorXd& weights) {
  const Eigen::Index m = capacity.rows();
  const Eigen::Index g = capacity.cols();
  if (!(min_rate > 0.0)) throw std::invalid_argument("minimum rate must be positive");
  if (weights.size() != g) throw std::invalid_argument("one weight per grid point required");
  if (auto bad = uncoverable_users(capacity, min_rate); !bad.empty()) throw InfeasibleError(bad);

  // Variables: R(i, j) at j * m + i, then s_j at m * g + j.
  const Eigen::Index n = m * g + g;
  LpProblem lp;
  lp.objective = Eigen::VectorXd::Zero(n);
  lp.objective.tail(g) = weights;
  lp.eq_matrix = Eigen::MatrixXd::Zero(m, n);
  lp.eq_rhs = Eigen::VectorXd::Ones(m);
  lp.ub_matrix = Eigen::MatrixXd::Zero(m * g, n);
  lp.ub_rhs = Eigen::VectorXd::Zero(m * g);
  lp.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < g; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index v = j * m + i;
      lp.eq_matrix(i, v) = 1.0;
      lp.ub_matrix(v, v) = 1.0;
      lp.ub_matrix(v, m * g + j) = -1.0;
      lp.upper[v] = capacity(i, j) / min_rate;
    }

  EpigraphLpResult out;
  out.lp = solve_lp(lp);
  if (out.lp.status != LpStatus::kOptimal) throw std::runtime_error("epigraph LP did not reach optimality");
  out.rates = Eigen::Map<const Eigen::MatrixXd>(out.lp.x.data(), m, g) * min_rate;
  out.slack = out.lp.x.tail(g) * min_rate;
  out.objective = out.lp.objective * min_rate;
  return out;
}

AlphaLpResult solve_alpha_lp(const Eigen::MatrixXd& capacity, double min_rate, int rounds,
                             double eps, double tau) {
  if (rounds < 1) throw std::invalid_argument("need at least one round");
  if (!(eps > 0.0)) throw std::invalid_argument("reweighting epsilon must be positive");
  if (auto bad = uncoverable_users(capacity, min_rate); !bad.empty()) throw InfeasibleError(bad);

  const Eigen::Index g = capacity.cols();
  const Eigen::MatrixXd normalized = capacity / min_rate;
  LpProblem lp;
  lp.objective = Eigen::VectorXd::Ones(g);
  lp.ub_matrix = -normalized;
  lp.ub_rhs = -Eigen::VectorXd::Ones(capacity.rows());
  lp.upper = Eigen::VectorXd::Ones(g);

  AlphaLpResult out;
  for (int r = 0; r < rounds; ++r) {
    if (r > 0) lp.objective = (eps + out.alpha.array()).inverse().matrix();
    out.rounds.push_back(solve_lp(lp));
    if (out.rounds.back().status != LpStatus::kOptimal)
      throw std::runtime_error("alpha LP did not reach optimality");
    out.alpha = out.rounds.back().x.cwiseMin(1.0);
  }
  out.selected = round_selection(normalized, out.alpha, 1.0, tau);
  return out;
}

}  // namespace absplace
