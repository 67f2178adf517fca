// SPDX-License-Identifier: Apache-2.0

#include "absplace/scenario.hpp"

#include "absplace/reference.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace absplace {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Band k of n equal bands over [0, extent].
std::pair<double, double> band(double extent, int n, int k) {
  const double w = extent / n;
  return {k * w, (k + 1) * w};
}

}  // namespace

void UrbanSpec::validate() const {
  if (!(area_x > 0.0 && area_y > 0.0)) throw std::invalid_argument("area must be positive");
  if (streets_per_axis < 2) throw std::invalid_argument("need at least 2 streets per axis");
  if (!(building_height >= 0.0)) throw std::invalid_argument("building height must be >= 0");
  if (!(absorption_db_per_m >= 0.0)) throw std::invalid_argument("absorption must be >= 0");
  if (!(flight_min >= 0.0 && flight_max >= flight_min)) throw std::invalid_argument("invalid flight band");
  if (!(slf_height >= flight_max && slf_height > 0.0))
    throw std::invalid_argument("SLF grid must reach the top of the flight band");
  if ((slf_dims <= 0).any() || (flight_dims <= 0).any()) throw std::invalid_argument("grid dims must be positive");
}

bool UrbanScenario::inside_building(const Point3& p) const {
  return std::any_of(buildings.begin(), buildings.end(), [&](const Box3& b) { return b.contains(p); });
}

bool UrbanScenario::on_street(double x, double y) const {
  return std::none_of(buildings.begin(), buildings.end(),
                      [&](const Box3& b) { return b.footprint_contains(x, y); });
}

UrbanScenario build_urban(const UrbanSpec& spec) {
  spec.validate();
  UrbanScenario sc;
  sc.spec = spec;

  const int bands = 2 * spec.streets_per_axis - 1;
  for (int i = 1; i < bands; i += 2)
    for (int j = 1; j < bands; j += 2) {
      const auto [x0, x1] = band(spec.area_x, bands, i);
      const auto [y0, y1] = band(spec.area_y, bands, j);
      sc.buildings.emplace_back(Point3(x0, y0, 0.0), Point3(x1, y1, spec.building_height));
    }

  const Eigen::Vector3d slf_spacing(spec.area_x / spec.slf_dims[0], spec.area_y / spec.slf_dims[1],
                                    spec.slf_height / spec.slf_dims[2]);
  const RegularGrid3 slf_grid(0.5 * slf_spacing, slf_spacing, spec.slf_dims);
  sc.slf = SlfField(slf_grid, 0.0);
  if (spec.building_height > 0.0 && spec.absorption_db_per_m > 0.0)
    for (std::size_t q = 0; q < slf_grid.size(); ++q) {
      const Point3 c = slf_grid.point(q);
      if (!sc.on_street(c.x(), c.y()) && c.z() <= spec.building_height)
        sc.slf.values()[static_cast<Eigen::Index>(q)] = spec.absorption_db_per_m;
    }

  const Index3& fd = spec.flight_dims;
  Eigen::Vector3d fspacing(spec.area_x / fd[0], spec.area_y / fd[1], 1.0);
  Point3 forigin(0.5 * fspacing[0], 0.5 * fspacing[1], spec.flight_min);
  if (fd[2] > 1) fspacing[2] = (spec.flight_max - spec.flight_min) / (fd[2] - 1);
  if (!(fspacing[2] > 0.0)) fspacing[2] = 1.0;
  sc.flight_lattice = RegularGrid3(forigin, fspacing, fd);
  for (std::size_t k = 0; k < sc.flight_lattice.size(); ++k) {
    const Point3 p = sc.flight_lattice.point(k);
    if (p.z() < spec.flight_min - 1e-9 || p.z() > spec.flight_max + 1e-9) continue;
    if (sc.inside_building(p)) continue;
    if (std::any_of(spec.no_fly.begin(), spec.no_fly.end(), [&](const Box3& b) { return b.contains(p); }))
      continue;
    sc.flight_points.push_back(p);
    sc.flight_indices.push_back(k);
  }
  if (sc.flight_points.empty()) throw std::runtime_error("flight grid is empty after removing buildings and no-fly zones");
  return sc;
}

std::vector<Point3> sample_users(const UrbanScenario& scenario, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("need at least one user");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, scenario.spec.area_x);
  std::uniform_real_distribution<double> uy(0.0, scenario.spec.area_y);
  std::vector<Point3> users;
  users.reserve(static_cast<std::size_t>(count));
  long attempts = 0;
  while (static_cast<int>(users.size()) < count) {
    if (++attempts > 1000L * count + 100000) throw std::runtime_error("street area too small to sample users");
    const double x = ux(rng);
    const double y = uy(rng);
    if (scenario.spec.users_in_buildings || scenario.on_street(x, y)) users.emplace_back(x, y, 0.0);
  }
  return users;
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kNumUsers: return "num_users";
    case SweepVariable::kBuildingHeight: return "building_height";
    case SweepVariable::kMinRate: return "min_rate";
  }
  return "?";
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "num_users") return SweepVariable::kNumUsers;
  if (name == "building_height") return SweepVariable::kBuildingHeight;
  if (name == "min_rate") return SweepVariable::kMinRate;
  throw std::invalid_argument("unknown sweep variable: " + name);
}

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::kAdmm: return "admm";
    case SolverKind::kAlphaLp: return "alpha_lp";
    case SolverKind::kExhaustive: return "exhaustive";
  }
  return "?";
}

SolverKind parse_solver(const std::string& name) {
  if (name == "admm") return SolverKind::kAdmm;
  if (name == "alpha_lp") return SolverKind::kAlphaLp;
  if (name == "exhaustive") return SolverKind::kExhaustive;
  throw std::invalid_argument("unknown solver: " + name);
}

void ExperimentSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep values must be nonempty");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (solvers.empty()) throw std::invalid_argument("at least one solver required");
  if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("sweep values must be finite");
    if (sweep == SweepVariable::kNumUsers && (v < 1 || v != std::floor(v)))
      throw std::invalid_argument("num_users sweep values must be positive integers");
    if (sweep == SweepVariable::kMinRate && !(v > 0)) throw std::invalid_argument("min_rate values must be positive");
    if (sweep == SweepVariable::kBuildingHeight && !(v >= 0)) throw std::invalid_argument("heights must be >= 0");
  }
  scenario.validate();
  channel.validate();
}

std::uint64_t run_seed(std::uint64_t base, int repetition) {
  return splitmix64(splitmix64(base) ^ static_cast<std::uint64_t>(repetition));
}

namespace {

RunRecord run_solver(SolverKind solver, const Eigen::MatrixXd& c, double min_rate,
                     const PlacementConfig<double>& placement) {
  RunRecord rec;
  rec.solver = solver;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    // Uncoverable users make the instance infeasible for every solver.
    if (!uncoverable_users(c, min_rate).empty()) throw InfeasibleError(uncoverable_users(c, min_rate));
    std::vector<Eigen::Index> selected;
    switch (solver) {
      case SolverKind::kAdmm:
        selected = solve_placement<double>(c, min_rate, placement).selected;
        break;
      case SolverKind::kAlphaLp:
        selected = solve_alpha_lp(c, min_rate, placement.reweight_rounds, placement.reweight_eps,
                                  placement.tau)
                       .selected;
        break;
      case SolverKind::kExhaustive:
        selected = exhaustive_min_abs(c, min_rate).subset;
        break;
    }
    rec.count = static_cast<int>(selected.size());
    rec.feasible = covers(c, selected, min_rate);
    rec.status = rec.feasible ? "ok" : "infeasible";
  } catch (const InfeasibleError&) {
    rec.status = "infeasible";
  } catch (const GuardError&) {
    rec.status = "guard";
  } catch (const std::exception&) {
    rec.status = "error";
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    std::size_t value_index;
    int repetition;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < spec.values.size(); ++v)
    for (int r = 0; r < spec.repetitions; ++r) jobs.push_back({v, r});

  // Scenarios depend only on the sweep value.
  std::vector<UrbanScenario> scenarios;
  std::vector<ChannelParams> channels;
  std::vector<int> user_counts;
  for (double value : spec.values) {
    UrbanSpec us = spec.scenario;
    ChannelParams ch = spec.channel;
    int users = spec.num_users;
    switch (spec.sweep) {
      case SweepVariable::kNumUsers: users = static_cast<int>(value); break;
      case SweepVariable::kBuildingHeight: us.building_height = value; break;
      case SweepVariable::kMinRate: ch.min_rate = value; break;
    }
    scenarios.push_back(build_urban(us));
    channels.push_back(ch);
    user_counts.push_back(users);
  }

  std::vector<std::vector<RunRecord>> slots(jobs.size());
  auto work = [&](std::size_t j) {
    const Job& job = jobs[j];
    const UrbanScenario& sc = scenarios[job.value_index];
    const ChannelParams& ch = channels[job.value_index];
    const std::uint64_t seed = run_seed(spec.seed, job.repetition);
    const auto users = sample_users(sc, user_counts[job.value_index], seed);
    const auto cap = build_capacity_matrix(ch, users, sc.flight_points, sc.slf, 1);
    for (SolverKind s : spec.solvers) {
      RunRecord rec = run_solver(s, cap.values, ch.min_rate, spec.placement);
      rec.sweep_value = spec.values[job.value_index];
      rec.repetition = job.repetition;
      rec.seed = seed;
      slots[j].push_back(rec);
    }
  };

  const unsigned workers = std::min<unsigned>(worker_threads(), static_cast<unsigned>(jobs.size()));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t j = w; j < jobs.size(); j += workers) work(j);
      });
    for (auto& t : pool) t.join();
  }

  ExperimentResult out;
  out.sweep = spec.sweep;
  for (auto& s : slots)
    for (auto& r : s) out.runs.push_back(std::move(r));
  out.summary = summarize(out.runs, spec.values, spec.solvers);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs, const std::vector<double>& values,
                                  const std::vector<SolverKind>& solvers) {
  std::vector<SummaryRow> rows;
  for (double v : values)
    for (SolverKind s : solvers) {
      SummaryRow row;
      row.sweep_value = v;
      row.solver = s;
      double sum = 0.0, sumsq = 0.0;
      for (const auto& r : runs) {
        if (r.sweep_value != v || r.solver != s) continue;
        ++row.n_runs;
        if (!r.feasible) continue;
        ++row.n_feasible;
        sum += r.count;
      }
      if (row.n_feasible > 0) row.mean_count = sum / row.n_feasible;
      for (const auto& r : runs)
        if (r.sweep_value == v && r.solver == s && r.feasible)
          sumsq += (r.count - row.mean_count) * (r.count - row.mean_count);
      if (row.n_feasible > 1)
        row.stderr_count = std::sqrt(sumsq / (row.n_feasible - 1)) / std::sqrt(static_cast<double>(row.n_feasible));
      rows.push_back(row);
    }
  return rows;
}

void write_runs_csv(std::ostream& os, SweepVariable sweep, const std::vector<RunRecord>& runs,
                    bool record_timing) {
  os << "sweep_var,sweep_value,repetition,solver,N,feasible,wall_ms,seed,status\n";
  for (const auto& r : runs)
    os << to_string(sweep) << ',' << format_number(r.sweep_value) << ',' << r.repetition << ','
       << to_string(r.solver) << ',' << r.count << ',' << (r.feasible ? 1 : 0) << ','
       << (record_timing ? format_number(std::round(r.wall_ms * 1000.0) / 1000.0) : "0") << ','
       << r.seed << ',' << r.status << '\n';
}

void write_summary_csv(std::ostream& os, SweepVariable sweep, const std::vector<SummaryRow>& rows) {
  os << "sweep_var,sweep_value,solver,mean_N,stderr,n_feasible,n_runs\n";
  for (const auto& r : rows)
    os << to_string(sweep) << ',' << format_number(r.sweep_value) << ',' << to_string(r.solver) << ','
       << format_number(r.mean_count) << ',' << format_number(r.stderr_count) << ',' << r.n_feasible
       << ',' << r.n_runs << '\n';
}

}  // namespace absplace
