// SPDX-License-Identifier: Apache-2.0
//
// absplace: map evaluation, single placements, experiment sweeps and oracle
// runs driven by one JSON configuration document.
//
// Exit codes: 0 success, 1 other failure, 2 domain error, 3 infeasible,
// 4 exhaustive-search guard.

#include "absplace/channel.hpp"
#include "absplace/config.hpp"
#include "absplace/placement.hpp"
#include "absplace/reference.hpp"
#include "absplace/scenario.hpp"
#include "absplace/tomography.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace absplace;
using Json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kFailure = 1, kDomain = 2, kInfeasible = 3, kGuard = 4 };

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> users;
  std::optional<double> min_rate;
  std::optional<double> height;
  std::optional<std::string> out_dir;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? parse_config("{}") : load_config(o.config_path);
  if (o.seed) cfg.experiment.seed = *o.seed;
  if (o.users) cfg.experiment.num_users = *o.users;
  if (o.min_rate) cfg.channel.min_rate = *o.min_rate;
  if (o.height) cfg.scenario.building_height = *o.height;
  if (o.out_dir) cfg.output.dir = *o.out_dir;
  cfg.validate();
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& suffix) {
  std::filesystem::create_directories(cfg.output.dir);
  return (std::filesystem::path(cfg.output.dir) / (cfg.output.prefix + suffix)).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

Json point_json(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

Json index_list(const std::vector<Eigen::Index>& v) {
  Json out = Json::array();
  for (auto i : v) out.push_back(i);
  return out;
}

// A single placement instance: scenario, users and capacity matrix.
struct Instance {
  UrbanScenario scenario;
  std::vector<Point3> users;
  CapacityMatrix capacity;
};

Instance build_instance(const RunConfig& cfg) {
  Instance inst{build_urban(cfg.scenario), {}, {}};
  inst.users = cfg.users.empty() ? sample_users(inst.scenario, cfg.experiment.num_users, cfg.experiment.seed)
                                 : cfg.users;
  inst.capacity = build_capacity_matrix(cfg.channel, inst.users, inst.scenario.flight_points, inst.scenario.slf);
  return inst;
}

int cmd_map(const RunConfig& cfg, const std::vector<double>& tx_flag, const std::vector<double>& rx_flag) {
  std::optional<Point3> tx = cfg.map.tx, rx = cfg.map.rx;
  if (!tx_flag.empty()) tx = Point3(tx_flag[0], tx_flag[1], tx_flag[2]);
  if (!rx_flag.empty()) rx = Point3(rx_flag[0], rx_flag[1], rx_flag[2]);
  if (!tx || !rx) throw ConfigError("map needs tx and rx points (map.tx / map.rx or --tx / --rx)");
  const UrbanScenario sc = build_urban(cfg.scenario);
  const Segment3 seg{*tx, *rx};
  const double xi = shadowing_line_integral(sc.slf, seg);
  const double xi_ell =
      shadowing_ellipsoid_sum(sc.slf, seg, cfg.map.ellipsoid_width.value_or(cfg.channel.wavelength));
  const double gain = gain_db(cfg.channel, *tx, *rx, xi);
  Json j;
  j["xi_traversal"] = xi;
  j["xi_ellipsoid"] = xi_ell;
  j["gain_db"] = gain;
  j["capacity_mbps"] = capacity_bps(cfg.channel, gain) / 1e6;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_place(const RunConfig& cfg) {
  const Instance inst = build_instance(cfg);
  const double r_min = cfg.channel.min_rate;
  Json j;
  j["num_users"] = inst.users.size();
  j["num_grid_points"] = inst.scenario.flight_points.size();
  j["min_rate"] = r_min;

  const auto bad = uncoverable_users(inst.capacity.values, r_min);
  if (!bad.empty()) {
    j["feasible"] = false;
    j["uncoverable_users"] = index_list(bad);
    open_out(out_path(cfg, "_place.json")) << j.dump(2) << '\n';
    std::cerr << "infeasible: no placement reaches the minimum rate for users:";
    for (auto m : bad) std::cerr << ' ' << m << " at " << to_string(inst.users[static_cast<std::size_t>(m)]);
    std::cerr << '\n';
    return kInfeasible;
  }

  const auto res = solve_placement<double>(inst.capacity.values, r_min, cfg.solver, inst.scenario.flight_points);
  j["N"] = res.selected.size();
  j["feasible"] = res.feasible;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["selected"] = index_list(res.selected);
  Json pos = Json::array();
  for (const auto& p : res.positions) pos.push_back(point_json(p));
  j["positions"] = pos;
  Json rates = Json::array();
  for (Eigen::Index m = 0; m < res.user_rates.size(); ++m) rates.push_back(res.user_rates[m]);
  j["user_rates"] = rates;
  Json users = Json::array();
  for (const auto& u : inst.users) users.push_back(point_json(u));
  j["users"] = users;

  open_out(out_path(cfg, "_place.json")) << j.dump(2) << '\n';
  {
    auto os = open_out(out_path(cfg, "_positions.csv"));
    os << "grid_index,x,y,z\n" << std::setprecision(17);
    for (std::size_t k = 0; k < res.selected.size(); ++k)
      os << res.selected[k] << ',' << res.positions[k].x() << ',' << res.positions[k].y() << ','
         << res.positions[k].z() << '\n';
  }
  {
    auto os = open_out(out_path(cfg, "_trace.csv"));
    os << "iteration,primal,dual,objective\n" << std::setprecision(17);
    for (const auto& t : res.trace) os << t.iteration << ',' << t.primal << ',' << t.dual << ',' << t.objective << '\n';
  }
  std::cout << j.dump(2) << '\n';
  if (!res.feasible) {
    std::cerr << "infeasible: rounded placement does not cover every user\n";
    return kInfeasible;
  }
  return kOk;
}

int cmd_experiment(const RunConfig& cfg) {
  if (cfg.experiment.values.empty()) throw ConfigError("experiment.values must list the sweep values");
  const ExperimentSpec spec = cfg.experiment_spec();
  const ExperimentResult res = run_experiment(spec);
  {
    auto os = open_out(out_path(cfg, "_runs.csv"));
    write_runs_csv(os, res.sweep, res.runs, spec.record_timing);
  }
  {
    auto os = open_out(out_path(cfg, "_summary.csv"));
    write_summary_csv(os, res.sweep, res.summary);
  }
  write_summary_csv(std::cout, res.sweep, res.summary);
  return kOk;
}

int cmd_oracle(const RunConfig& cfg, bool compare_admm) {
  const Instance inst = build_instance(cfg);
  const double r_min = cfg.channel.min_rate;
  const auto ex = exhaustive_min_abs(inst.capacity.values, r_min);
  Json j;
  j["N_star"] = ex.count;
  j["subset"] = index_list(ex.subset);
  Json pos = Json::array();
  for (auto g : ex.subset) pos.push_back(point_json(inst.scenario.flight_points[static_cast<std::size_t>(g)]));
  j["positions"] = pos;
  j["subsets_checked"] = ex.subsets_checked;
  if (compare_admm) {
    const auto res = solve_placement<double>(inst.capacity.values, r_min, cfg.solver);
    j["N_admm"] = res.selected.size();
    j["admm_feasible"] = res.feasible;
    j["gap"] = static_cast<long>(res.selected.size()) - ex.count;
  }
  open_out(out_path(cfg, "_oracle.json")) << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_slf(const RunConfig& cfg) {
  const UrbanScenario sc = build_urban(cfg.scenario);
  save_slf(out_path(cfg, "_slf.txt"), sc.slf);
  write_slf(std::cout, sc.slf);
  return kOk;
}

int cmd_estimate(const RunConfig& cfg, const std::string& measurements_path, double ridge) {
  std::ifstream in(measurements_path);
  if (!in) throw std::runtime_error("cannot open " + measurements_path);
  const auto meas = read_measurements_csv(in);
  const UrbanScenario sc = build_urban(cfg.scenario);
  EstimatorOptions opts;
  opts.ridge = ridge;
  const SlfField est = estimate_slf(meas, sc.slf.grid(), opts);
  save_slf(out_path(cfg, "_slf_estimate.txt"), est);
  write_slf(std::cout, est);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aerial base station placement on tomographic radio maps"};
  app.require_subcommand(1);
  Overrides ov;
  app.add_option("-c,--config", ov.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", ov.seed, "Override experiment.seed");
  app.add_option("--users", ov.users, "Override experiment.num_users");
  app.add_option("--min-rate", ov.min_rate, "Override channel.min_rate (bit/s)");
  app.add_option("--height", ov.height, "Override scenario.building_height (m)");
  app.add_option("--out-dir", ov.out_dir, "Override output.dir");

  auto* map = app.add_subcommand("map", "Shadowing, gain and capacity for one link");
  std::vector<double> tx, rx;
  map->add_option("--tx", tx, "Transmitter x y z")->expected(3);
  map->add_option("--rx", rx, "Receiver x y z")->expected(3);

  app.add_subcommand("place", "Solve one placement instance");
  app.add_subcommand("experiment", "Monte Carlo sweep");
  auto* oracle = app.add_subcommand("oracle", "Exhaustive minimum for a small instance");
  bool compare = false;
  oracle->add_flag("--compare-admm", compare, "Also run placement and report the gap");
  app.add_subcommand("slf", "Write the scenario SLF");
  auto* est = app.add_subcommand("estimate", "Estimate an SLF from a measurements CSV");
  std::string meas_path;
  double ridge = 1e-6;
  est->add_option("measurements", meas_path, "CSV: tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,shadowing_db")->required();
  est->add_option("--ridge", ridge, "Ridge regularization weight");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(ov);
    if (*map) return cmd_map(cfg, tx, rx);
    if (app.got_subcommand("place")) return cmd_place(cfg);
    if (app.got_subcommand("experiment")) return cmd_experiment(cfg);
    if (*oracle) return cmd_oracle(cfg, compare);
    if (app.got_subcommand("slf")) return cmd_slf(cfg);
    if (*est) return cmd_estimate(cfg, meas_path, ridge);
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const InfeasibleError& e) {
    std::cerr << e.what() << '\n';
    return kInfeasible;
  } catch (const GuardError& e) {
    std::cerr << "guard: " << e.what() << '\n';
    return kGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
