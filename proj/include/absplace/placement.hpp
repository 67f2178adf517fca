// SPDX-License-Identifier: Apache-2.0
//
// ADMM solver for the group-sparse rate allocation
//
//   minimize   sum_g w_g * ||R[:, g]||_inf
//   subject to R 1 = r_min 1,  0 <= R <= C,
//
// and the outer reweighting / rounding loop that turns its solution into a
// set of flight-grid points hosting aerial base stations.
//
// Splitting X = [R; s] against Z = R gives three cheap updates per iteration:
//   X-step  one scalar bisection per column (slack level s_g),
//   Z-step  one scalar bisection per row (capped simplex projection),
//   U-step  U += R - Z.
// Both bisections run on the brackets derived from the KKT conditions, which
// are guaranteed to contain the unique root.
//
// Everything here is templated on the scalar type; double is what the
// library and CLI instantiate.

#ifndef ABSPLACE_PLACEMENT_HPP
#define ABSPLACE_PLACEMENT_HPP

#include "absplace/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace absplace {

/// Some user cannot reach r_min even with an ABS at every grid point.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(std::vector<Eigen::Index> users)
      : std::runtime_error(describe(users)), users_(std::move(users)) {}

  const std::vector<Eigen::Index>& users() const { return users_; }

 private:
  static std::string describe(const std::vector<Eigen::Index>& users) {
    std::string s = "infeasible: users cannot reach the minimum rate:";
    for (auto m : users) s += ' ' + std::to_string(m);
    return s;
  }
  std::vector<Eigen::Index> users_;
};

namespace detail {

/// Bisection for a nonincreasing f on [lo, hi] with f(lo) >= target >= f(hi).
/// Stops once the bracket is a few ulps wide.
template <typename Scalar, typename F>
Scalar bisect_nonincreasing(F&& f, Scalar lo, Scalar hi, Scalar target) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) break;
    if (hi - lo <= 4 * eps * std::max({std::abs(lo), std::abs(hi), Scalar(1)})) break;
    const Scalar v = f(mid);
    if (v > target)
      lo = mid;
    else if (v < target)
      hi = mid;
    else
      return mid;
  }
  return lo + (hi - lo) / 2;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// X-step

template <typename Scalar>
struct XStepResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rates;
  Scalar slack = 0;
  Scalar bracket_lo = 0;
  Scalar bracket_hi = 0;
};

/// F(s) = 1^T max(a - s 1, 0) for a = z - u.
template <typename DerivedA, typename Scalar = typename DerivedA::Scalar>
Scalar slack_excess(const Eigen::MatrixBase<DerivedA>& a, Scalar s) {
  return (a.array() - s).cwiseMax(Scalar(0)).sum();
}

/// Column update: r = min(z - u, s 1) with s the root of F(s) = w / rho.
/// With w = 0 the slack constraint is inactive and r = z - u.
template <typename DerivedZ, typename DerivedU>
XStepResult<typename DerivedZ::Scalar> x_step_column(const Eigen::MatrixBase<DerivedZ>& z,
                                                     const Eigen::MatrixBase<DerivedU>& u,
                                                     typename DerivedZ::Scalar weight,
                                                     typename DerivedZ::Scalar rho) {
  using Scalar = typename DerivedZ::Scalar;
  if (!(rho > 0)) throw std::invalid_argument("ADMM step size must be positive");
  if (!(weight >= 0)) throw std::invalid_argument("weights must be nonnegative");
  XStepResult<Scalar> out;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a = z - u;
  if (weight == 0) {
    out.rates = a;
    out.slack = a.size() ? a.maxCoeff() : Scalar(0);
    out.bracket_lo = out.bracket_hi = out.slack;
    return out;
  }
  const Scalar target = weight / rho;
  const Scalar shift = target / static_cast<Scalar>(a.size());
  out.bracket_lo = a.minCoeff() - shift;
  out.bracket_hi = a.maxCoeff() - shift;
  out.slack = detail::bisect_nonincreasing<Scalar>([&](Scalar s) { return slack_excess(a, s); },
                                                   out.bracket_lo, out.bracket_hi, target);
  out.rates = a.cwiseMin(out.slack);
  return out;
}

// ---------------------------------------------------------------------------
// Z-step

template <typename Scalar>
struct ZStepResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z;
  Scalar lambda = 0;
  Scalar bracket_lo = 0;
  Scalar bracket_hi = 0;
};

/// G(lambda) = 1^T max(0, min(c, a - lambda 1)) for a = r + u.
template <typename DerivedA, typename DerivedC, typename Scalar = typename DerivedA::Scalar>
Scalar capped_mass(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedC>& c,
                   Scalar lambda) {
  return (a.array() - lambda).min(c.array()).max(Scalar(0)).sum();
}

/// Row update: Euclidean projection of r + u onto {z : 1^T z = r_min, 0 <= z <= c}.
/// Throws InfeasibleError (naming `user`) if 1^T c < r_min.
template <typename DerivedR, typename DerivedU, typename DerivedC>
ZStepResult<typename DerivedR::Scalar> z_step_row(const Eigen::MatrixBase<DerivedR>& r,
                                                  const Eigen::MatrixBase<DerivedU>& u,
                                                  const Eigen::MatrixBase<DerivedC>& c,
                                                  typename DerivedR::Scalar min_rate,
                                                  Eigen::Index user = 0) {
  using Scalar = typename DerivedR::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vec a = r + u;
  const Vec cap = c;
  if (cap.sum() < min_rate) throw InfeasibleError({user});

  ZStepResult<Scalar> out;
  const Scalar level = min_rate / static_cast<Scalar>(cap.size());
  out.bracket_lo = (a - cap).minCoeff();
  Scalar hi = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index g = 0; g < cap.size(); ++g)
    if (cap[g] > level) hi = std::max(hi, a[g]);
  if (hi == -std::numeric_limits<Scalar>::infinity()) {
    // Every cap equals r_min / G, so the only feasible point is z = c.
    out.bracket_hi = out.lambda = out.bracket_lo;
    out.z = cap;
    return out;
  }
  out.bracket_hi = hi - level;
  if (out.bracket_hi <= out.bracket_lo) {
    // G(hi) >= G(lo) >= r_min >= G(hi): hi is already a root.
    out.bracket_lo = out.lambda = out.bracket_hi;
  } else {
    out.lambda = detail::bisect_nonincreasing<Scalar>(
        [&](Scalar l) { return capped_mass(a, cap, l); }, out.bracket_lo, out.bracket_hi, min_rate);
  }
  out.z = (a.array() - out.lambda).min(cap.array()).max(Scalar(0)).matrix();
  return out;
}

// ---------------------------------------------------------------------------
// ADMM driver

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct AdmmState {
  MatrixX<Scalar> rates;   // R
  MatrixX<Scalar> split;   // Z
  MatrixX<Scalar> duals;   // U (scaled)
  VectorX<Scalar> slack;   // s
  VectorX<Scalar> weights; // w
  Scalar rho = 1;
  int iteration = 0;
};

struct AdmmTraceRow {
  int iteration = 0;
  double primal = 0;
  double dual = 0;
  double objective = 0;
};

template <typename Scalar>
struct AdmmOptions {
  /// Step size on rates normalized by r_min.
  Scalar rho = 1;
  int max_iter = 10000;
  /// Absolute tolerance relative to r_min.
  Scalar eps_abs = Scalar(1e-6);
  Scalar eps_rel = Scalar(1e-4);
};

template <typename Scalar>
struct AdmmResult {
  AdmmState<Scalar> state;  // in the caller's rate units
  bool converged = false;
  std::vector<AdmmTraceRow> trace;
};

/// sum_g w_g ||R[:, g]||_inf
template <typename DerivedR, typename DerivedW>
typename DerivedR::Scalar group_objective(const Eigen::MatrixBase<DerivedR>& rates,
                                          const Eigen::MatrixBase<DerivedW>& weights) {
  if (rates.rows() == 0) return 0;
  return weights.dot(rates.cwiseAbs().colwise().maxCoeff().transpose());
}

/// Rows of C whose total capacity is below r_min.
template <typename DerivedC>
std::vector<Eigen::Index> uncoverable_users(const Eigen::MatrixBase<DerivedC>& capacity,
                                            typename DerivedC::Scalar min_rate) {
  std::vector<Eigen::Index> bad;
  for (Eigen::Index m = 0; m < capacity.rows(); ++m)
    if (capacity.row(m).sum() < min_rate) bad.push_back(m);
  return bad;
}

/// Per-iteration observer; receives the state in normalized units (r_min = 1).
template <typename Scalar>
using AdmmObserver = std::function<void(const AdmmState<Scalar>&)>;

/// Runs the ADMM iteration until the primal and dual residuals satisfy
///   ||R - Z||_F          <= eps_abs sqrt(MG) + eps_rel max(||R||_F, ||Z||_F)
///   rho ||Z_k+1 - Z_k||_F <= the same bound.
/// Internally C and r_min are divided by r_min; results are scaled back.
/// `warm` (in caller units) replaces the default start Z = min(C, r_min/G), U = 0.
template <typename Scalar>
AdmmResult<Scalar> admm_solve(const MatrixX<Scalar>& capacity, Scalar min_rate,
                              const VectorX<Scalar>& weights, const AdmmOptions<Scalar>& opts = {},
                              const AdmmState<Scalar>* warm = nullptr,
                              const AdmmObserver<Scalar>& observer = {}) {
  const Eigen::Index m_users = capacity.rows();
  const Eigen::Index g_points = capacity.cols();
  if (!(min_rate > 0)) throw std::invalid_argument("minimum rate must be positive");
  if (!(opts.rho > 0)) throw std::invalid_argument("ADMM step size must be positive");
  if (weights.size() != g_points) throw std::invalid_argument("one weight per grid point required");
  if ((weights.array() < 0).any()) throw std::invalid_argument("weights must be nonnegative");
  if (m_users == 0 || g_points == 0) throw std::invalid_argument("empty capacity matrix");
  if (auto bad = uncoverable_users(capacity, min_rate); !bad.empty()) throw InfeasibleError(bad);

  const MatrixX<Scalar> cap = capacity / min_rate;
  AdmmState<Scalar> st;
  st.rho = opts.rho;
  st.weights = weights;
  if (warm) {
    st.split = warm->split / min_rate;
    st.duals = warm->duals / min_rate;
  } else {
    st.split = cap.cwiseMin(Scalar(1) / static_cast<Scalar>(g_points));
    st.duals = MatrixX<Scalar>::Zero(m_users, g_points);
  }
  st.rates = st.split;
  st.slack = VectorX<Scalar>::Zero(g_points);

  AdmmResult<Scalar> out;
  const Scalar abs_term = opts.eps_abs * std::sqrt(static_cast<Scalar>(m_users * g_points));
  MatrixX<Scalar> previous;
  for (int k = 1; k <= opts.max_iter; ++k) {
    for (Eigen::Index g = 0; g < g_points; ++g) {
      auto x = x_step_column(st.split.col(g), st.duals.col(g), st.weights[g], st.rho);
      st.rates.col(g) = x.rates;
      st.slack[g] = x.slack;
    }
    previous = st.split;
    for (Eigen::Index m = 0; m < m_users; ++m)
      st.split.row(m) =
          z_step_row(st.rates.row(m), st.duals.row(m), cap.row(m), Scalar(1), m).z.transpose();
    st.duals += st.rates - st.split;
    st.iteration = k;

    const Scalar primal = (st.rates - st.split).norm();
    const Scalar dual = st.rho * (st.split - previous).norm();
    const Scalar bound = abs_term + opts.eps_rel * std::max(st.rates.norm(), st.split.norm());
    out.trace.push_back({k, static_cast<double>(primal * min_rate),
                         static_cast<double>(dual * min_rate),
                         static_cast<double>(group_objective(st.rates, st.weights) * min_rate)});
    if (observer) observer(st);
    if (primal <= bound && dual <= bound) {
      out.converged = true;
      break;
    }
  }
  st.rates *= min_rate;
  st.split *= min_rate;
  st.duals *= min_rate;
  st.slack *= min_rate;
  out.state = std::move(st);
  return out;
}

/// w_g = 1 / (eps + ||R[:, g]||_inf / r_min).
template <typename DerivedR>
VectorX<typename DerivedR::Scalar> reweight(const Eigen::MatrixBase<DerivedR>& rates,
                                            typename DerivedR::Scalar min_rate,
                                            typename DerivedR::Scalar eps) {
  using Scalar = typename DerivedR::Scalar;
  if (!(eps > 0)) throw std::invalid_argument("reweighting epsilon must be positive");
  VectorX<Scalar> w(rates.cols());
  for (Eigen::Index g = 0; g < rates.cols(); ++g) {
    const Scalar mag = rates.rows() ? rates.col(g).cwiseAbs().maxCoeff() : Scalar(0);
    w[g] = Scalar(1) / (eps + mag / min_rate);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Rounding

/// True if the columns in `selected` jointly give every user at least r_min.
template <typename DerivedC>
bool covers(const Eigen::MatrixBase<DerivedC>& capacity, const std::vector<Eigen::Index>& selected,
            typename DerivedC::Scalar min_rate) {
  using Scalar = typename DerivedC::Scalar;
  VectorX<Scalar> total = VectorX<Scalar>::Zero(capacity.rows());
  for (auto g : selected) total += capacity.col(g);
  return (total.array() >= min_rate).all();
}

/// Turns per-column scores into a feasible, irredundant set of columns.
///
/// Columns are ranked by score, quantized to 1e-9 * r_min so that ulp noise
/// between equivalent orderings cannot decide; score ties fall back to the
/// column's capacities (larger total, then lexicographically larger), and only
/// identical columns fall back to the lower index. The ranking therefore
/// follows the columns under permutation.
///
/// 1. keep columns with score > tau * r_min;
/// 2. while infeasible, add the best-ranked remaining column;
/// 3. drop columns whose removal keeps the set feasible, worst-ranked first.
/// Returns the selection sorted by index. Throws InfeasibleError when even
/// all columns cannot cover every user.
template <typename DerivedC, typename DerivedS>
std::vector<Eigen::Index> round_selection(const Eigen::MatrixBase<DerivedC>& capacity,
                                          const Eigen::MatrixBase<DerivedS>& scores,
                                          typename DerivedC::Scalar min_rate,
                                          typename DerivedC::Scalar tau) {
  if (auto bad = uncoverable_users(capacity, min_rate); !bad.empty()) throw InfeasibleError(bad);
  using Scalar = typename DerivedC::Scalar;
  const Eigen::Index n = capacity.cols();
  const Scalar quantum = Scalar(1e-9) * min_rate;
  auto level = [&](Eigen::Index g) { return std::round(scores[g] / quantum); };
  auto ranks_before = [&](Eigen::Index a, Eigen::Index b) {
    if (level(a) != level(b)) return level(a) > level(b);
    const Scalar sa = capacity.col(a).sum(), sb = capacity.col(b).sum();
    if (sa != sb) return sa > sb;
    for (Eigen::Index m = 0; m < capacity.rows(); ++m)
      if (capacity(m, a) != capacity(m, b)) return capacity(m, a) > capacity(m, b);
    return a < b;
  };
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), ranks_before);

  std::vector<Eigen::Index> selected;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (auto g : order)
    if (scores[g] > tau * min_rate) {
      selected.push_back(g);
      taken[static_cast<std::size_t>(g)] = true;
    }
  for (auto g : order) {
    if (covers(capacity, selected, min_rate)) break;
    if (!taken[static_cast<std::size_t>(g)]) {
      selected.push_back(g);
      taken[static_cast<std::size_t>(g)] = true;
    }
  }

  std::vector<Eigen::Index> prune_order = selected;
  std::sort(prune_order.begin(), prune_order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return ranks_before(b, a); });
  for (auto g : prune_order) {
    std::vector<Eigen::Index> trial;
    for (auto h : selected)
      if (h != g) trial.push_back(h);
    if (!trial.empty() && covers(capacity, trial, min_rate)) selected = std::move(trial);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

// ---------------------------------------------------------------------------
// Full placement

template <typename Scalar>
struct PlacementConfig {
  AdmmOptions<Scalar> admm;
  /// Outer rounds: the first uses uniform weights, later ones reweight.
  int reweight_rounds = 4;
  Scalar reweight_eps = Scalar(1e-3);
  /// Extraction threshold relative to r_min.
  Scalar tau = Scalar(1e-3);
  /// Extract from Z (exactly row-feasible) instead of R.
  bool extract_from_split = false;
};

template <typename Scalar>
struct PlacementResult {
  std::vector<Eigen::Index> selected;
  std::vector<Point3> positions;
  VectorX<Scalar> user_rates;
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  std::vector<AdmmTraceRow> trace;
  MatrixX<Scalar> rates;  // final relaxed allocation
};

/// Minimizes the number of grid points needed so every user gets r_min.
///
/// `grid_points`, if nonempty, maps column g to its position. The relaxed
/// problem is solved by reweighted ADMM (warm started across rounds), then
/// rounded with round_selection() using actual capacities.
template <typename Scalar>
PlacementResult<Scalar> solve_placement(const MatrixX<Scalar>& capacity, Scalar min_rate,
                                        const PlacementConfig<Scalar>& config = {},
                                        const std::vector<Point3>& grid_points = {}) {
  if (config.reweight_rounds < 1) throw std::invalid_argument("need at least one reweighting round");
  if (!grid_points.empty() && static_cast<Eigen::Index>(grid_points.size()) != capacity.cols())
    throw std::invalid_argument("grid point count does not match capacity columns");

  PlacementResult<Scalar> out;
  VectorX<Scalar> w = VectorX<Scalar>::Ones(capacity.cols());
  AdmmResult<Scalar> run;
  for (int round = 0; round < config.reweight_rounds; ++round) {
    if (round > 0) w = reweight(run.state.rates, min_rate, config.reweight_eps);
    const AdmmState<Scalar> warm = run.state;
    run = admm_solve<Scalar>(capacity, min_rate, w, config.admm, round > 0 ? &warm : nullptr);
    for (auto row : run.trace) {
      row.iteration += out.iterations;
      out.trace.push_back(row);
    }
    out.iterations += static_cast<int>(run.trace.size());
  }
  out.converged = run.converged;

  const MatrixX<Scalar>& source = config.extract_from_split ? run.state.split : run.state.rates;
  const VectorX<Scalar> scores = source.cwiseMax(Scalar(0)).colwise().maxCoeff().transpose();
  out.selected = round_selection(capacity, scores, min_rate, config.tau);
  out.user_rates = VectorX<Scalar>::Zero(capacity.rows());
  for (auto g : out.selected) {
    out.user_rates += capacity.col(g);
    if (!grid_points.empty()) out.positions.push_back(grid_points[static_cast<std::size_t>(g)]);
  }
  out.feasible = (out.user_rates.array() >= min_rate).all();
  out.rates = std::move(run.state.rates);
  return out;
}

}  // namespace absplace

#endif  // ABSPLACE_PLACEMENT_HPP
