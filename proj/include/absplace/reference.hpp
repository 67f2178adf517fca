// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth solvers used to validate the placement pipeline: a dense
// simplex LP routine, the exact epigraph LP of the relaxed placement
// problem, the reweighted alpha-relaxation LP, and exhaustive search.

#ifndef ABSPLACE_REFERENCE_HPP
#define ABSPLACE_REFERENCE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace absplace {

/// minimize c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  0 <= x <= upper.
/// Entries of `upper` may be +infinity; an empty `upper` means unbounded.
struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ub_matrix;
  Eigen::VectorXd ub_rhs;
  Eigen::VectorXd upper;

  Eigen::Index num_vars() const { return objective.size(); }
  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Dual objective recovered from the optimal basis.
  double dual_objective = 0.0;
  /// |primal - dual| / max(1, |primal|).
  double duality_gap = 0.0;
  /// Largest violation of dual feasibility (negative reduced cost), scaled like the gap.
  double dual_infeasibility = 0.0;
  /// Largest violation of primal constraints.
  double primal_infeasibility = 0.0;
  int pivots = 0;

  bool certified(double tol = 1e-8) const {
    return status == LpStatus::kOptimal && duality_gap <= tol && dual_infeasibility <= tol &&
           primal_infeasibility <= tol;
  }
};

/// Two-phase dense tableau simplex with Bland's anti-cycling rule.
LpSolution solve_lp(const LpProblem& problem);

class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Eigen::Index kExhaustiveMaxPoints = 25;

struct ExhaustiveResult {
  int count = 0;
  std::vector<Eigen::Index> subset;
  std::uint64_t subsets_checked = 0;
};

/// Smallest set S with sum_{g in S} C[:, g] >= r_min for every user.
///
/// Subsets are enumerated by increasing size, lexicographically within a
/// size; the first feasible one is returned. Throws GuardError for more than
/// kExhaustiveMaxPoints columns and InfeasibleError if no subset works.
ExhaustiveResult exhaustive_min_abs(const Eigen::MatrixXd& capacity, double min_rate);

struct EpigraphLpResult {
  double objective = 0.0;
  Eigen::MatrixXd rates;   // R, in the caller's rate units
  Eigen::VectorXd slack;   // s
  LpSolution lp;
};

/// min w^T s  s.t.  R 1 = r_min 1, 0 <= R <= C, R[:, g] <= s_g 1.
/// Rates are normalized by r_min before solving and scaled back.
EpigraphLpResult solve_epigraph_lp(const Eigen::MatrixXd& capacity, double min_rate,
                                   const Eigen::VectorXd& weights);

struct AlphaLpResult {
  Eigen::VectorXd alpha;
  std::vector<Eigen::Index> selected;
  std::vector<LpSolution> rounds;
};

/// Reweighted relaxation min w^T alpha s.t. C alpha >= r_min 1, alpha in [0, 1]^G,
/// with w = 1 first and then w_g = 1 / (eps + alpha_g). The final alpha is
/// rounded with the same threshold / repair / prune procedure as placement.
AlphaLpResult solve_alpha_lp(const Eigen::MatrixXd& capacity, double min_rate, int rounds = 4,
                             double eps = 1e-3, double tau = 1e-3);

}  // namespace absplace

#endif  // ABSPLACE_REFERENCE_HPP
