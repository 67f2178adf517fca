// SPDX-License-Identifier: Apache-2.0

#include "absplace/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace absplace {

namespace {

using Json = nlohmann::ordered_json;

class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(name_ + ": unknown key '" + k + "'");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const Json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return name_ + "." + key; }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    out = as_number(at(key), path(key));
  }
  void integer(const char* key, int& out) const {
    if (!has(key)) return;
    const Json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    out = v.get<int>();
  }
  void boolean(const char* key, bool& out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) throw ConfigError(path(key) + ": expected true or false");
    out = at(key).get<bool>();
  }
  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) throw ConfigError(path(key) + ": expected a string");
    out = at(key).get<std::string>();
  }

  static double as_number(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
    return x;
  }

 private:
  const Json& j_;
  std::string name_;
};

std::vector<double> number_list(const Json& v, const std::string& where, std::size_t size = 0) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  if (size && v.size() != size) throw ConfigError(where + ": expected " + std::to_string(size) + " entries");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(Section::as_number(e, where));
  return out;
}

Point3 point(const Json& v, const std::string& where) {
  const auto xs = number_list(v, where, 3);
  return {xs[0], xs[1], xs[2]};
}

Index3 dims(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": expected 3 integers");
  Index3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number_integer()) throw ConfigError(where + ": expected 3 integers");
    out[i] = v[static_cast<std::size_t>(i)].get<int>();
  }
  return out;
}

void parse_channel(const Json& j, ChannelParams& ch) {
  Section s(j, "channel");
  s.allow({"carrier_frequency", "wavelength", "bandwidth", "tx_power", "noise_power", "noise_power_dbm",
           "min_rate"});
  if (s.has("carrier_frequency") && s.has("wavelength"))
    throw ConfigError("channel: give either carrier_frequency or wavelength, not both");
  if (s.has("noise_power") && s.has("noise_power_dbm"))
    throw ConfigError("channel: give either noise_power or noise_power_dbm, not both");
  if (s.has("carrier_frequency")) {
    double f = 0.0;
    s.number("carrier_frequency", f);
    if (!(f > 0.0)) throw ConfigError("channel.carrier_frequency: must be positive");
    ch.wavelength = kSpeedOfLight / f;
  }
  s.number("wavelength", ch.wavelength);
  s.number("bandwidth", ch.bandwidth);
  s.number("tx_power", ch.tx_power);
  s.number("noise_power", ch.noise_power);
  if (s.has("noise_power_dbm")) {
    double dbm = 0.0;
    s.number("noise_power_dbm", dbm);
    ch.noise_power = dbm_to_watt(dbm);
  }
  s.number("min_rate", ch.min_rate);
}

void parse_scenario(const Json& j, UrbanSpec& sc, std::vector<Point3>& users) {
  Section s(j, "scenario");
  s.allow({"area", "streets_per_axis", "building_height", "absorption", "flight_band", "slf_height",
           "slf_grid", "flight_grid", "no_fly", "users_in_buildings", "users"});
  if (s.has("area")) {
    const auto a = number_list(s.at("area"), s.path("area"), 2);
    sc.area_x = a[0];
    sc.area_y = a[1];
  }
  s.integer("streets_per_axis", sc.streets_per_axis);
  s.number("building_height", sc.building_height);
  s.number("absorption", sc.absorption_db_per_m);
  if (s.has("flight_band")) {
    const auto b = number_list(s.at("flight_band"), s.path("flight_band"), 2);
    sc.flight_min = b[0];
    sc.flight_max = b[1];
  }
  s.number("slf_height", sc.slf_height);
  if (s.has("slf_grid")) sc.slf_dims = dims(s.at("slf_grid"), s.path("slf_grid"));
  if (s.has("flight_grid")) sc.flight_dims = dims(s.at("flight_grid"), s.path("flight_grid"));
  if (s.has("no_fly")) {
    const Json& list = s.at("no_fly");
    if (!list.is_array()) throw ConfigError("scenario.no_fly: expected an array");
    sc.no_fly.clear();
    for (const auto& box : list) {
      Section b(box, "scenario.no_fly[]");
      b.allow({"min", "max"});
      if (!b.has("min") || !b.has("max")) throw ConfigError("scenario.no_fly[]: needs min and max");
      const Point3 lo = point(b.at("min"), b.path("min")), hi = point(b.at("max"), b.path("max"));
      if ((hi.array() < lo.array()).any()) throw ConfigError("scenario.no_fly[]: min exceeds max");
      sc.no_fly.emplace_back(lo, hi);
    }
  }
  s.boolean("users_in_buildings", sc.users_in_buildings);
  if (s.has("users")) {
    const Json& list = s.at("users");
    if (!list.is_array()) throw ConfigError("scenario.users: expected an array of points");
    users.clear();
    for (const auto& p : list) users.push_back(point(p, "scenario.users[]"));
  }
}

void parse_solver_section(const Json& j, PlacementConfig<double>& cfg) {
  Section s(j, "solver");
  s.allow({"rho", "eps_abs", "eps_rel", "max_iter", "reweight_rounds", "reweight_eps", "tau", "extract_from"});
  s.number("rho", cfg.admm.rho);
  s.number("eps_abs", cfg.admm.eps_abs);
  s.number("eps_rel", cfg.admm.eps_rel);
  s.integer("max_iter", cfg.admm.max_iter);
  s.integer("reweight_rounds", cfg.reweight_rounds);
  s.number("reweight_eps", cfg.reweight_eps);
  s.number("tau", cfg.tau);
  if (s.has("extract_from")) {
    std::string from;
    s.string("extract_from", from);
    if (from == "rates")
      cfg.extract_from_split = false;
    else if (from == "split")
      cfg.extract_from_split = true;
    else
      throw ConfigError("solver.extract_from: expected 'rates' or 'split'");
  }
}

void parse_experiment(const Json& j, ExperimentSpec& ex) {
  Section s(j, "experiment");
  s.allow({"sweep", "values", "repetitions", "seed", "num_users", "solvers"});
  try {
    if (s.has("sweep")) {
      std::string name;
      s.string("sweep", name);
      ex.sweep = parse_sweep_variable(name);
    }
    if (s.has("solvers")) {
      const Json& list = s.at("solvers");
      if (!list.is_array()) throw ConfigError("experiment.solvers: expected an array");
      ex.solvers.clear();
      for (const auto& v : list) {
        if (!v.is_string()) throw ConfigError("experiment.solvers: expected solver names");
        ex.solvers.push_back(parse_solver(v.get<std::string>()));
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
  if (s.has("values")) ex.values = number_list(s.at("values"), s.path("values"));
  s.integer("repetitions", ex.repetitions);
  if (s.has("seed")) {
    const Json& v = s.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError("experiment.seed: expected a nonnegative integer");
    ex.seed = v.get<std::uint64_t>();
  }
  s.integer("num_users", ex.num_users);
}

void parse_output(const Json& j, OutputSpec& out) {
  Section s(j, "output");
  s.allow({"dir", "prefix", "record_timing"});
  s.string("dir", out.dir);
  s.string("prefix", out.prefix);
  s.boolean("record_timing", out.record_timing);
}

void parse_map(const Json& j, MapSpec& map) {
  Section s(j, "map");
  s.allow({"tx", "rx", "ellipsoid_width"});
  if (s.has("tx")) map.tx = point(s.at("tx"), s.path("tx"));
  if (s.has("rx")) map.rx = point(s.at("rx"), s.path("rx"));
  if (s.has("ellipsoid_width")) {
    double w = 0.0;
    s.number("ellipsoid_width", w);
    map.ellipsoid_width = w;
  }
}

}  // namespace

ExperimentSpec RunConfig::experiment_spec() const {
  ExperimentSpec ex = experiment;
  ex.scenario = scenario;
  ex.channel = channel;
  ex.placement = solver;
  ex.record_timing = output.record_timing;
  return ex;
}

void RunConfig::validate() const {
  try {
    channel.validate();
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto& a = solver.admm;
  if (!(a.rho > 0.0)) throw ConfigError("solver.rho: must be positive");
  if (!(a.eps_abs > 0.0) || !(a.eps_rel >= 0.0)) throw ConfigError("solver: tolerances must be positive");
  if (a.max_iter < 1) throw ConfigError("solver.max_iter: must be >= 1");
  if (solver.reweight_rounds < 1) throw ConfigError("solver.reweight_rounds: must be >= 1");
  if (!(solver.reweight_eps > 0.0)) throw ConfigError("solver.reweight_eps: must be positive");
  if (!(solver.tau >= 0.0)) throw ConfigError("solver.tau: must be >= 0");
  if (experiment.repetitions < 1) throw ConfigError("experiment.repetitions: must be >= 1");
  if (experiment.num_users < 1) throw ConfigError("experiment.num_users: must be >= 1");
  if (experiment.solvers.empty()) throw ConfigError("experiment.solvers: must be nonempty");
  if (!experiment.values.empty()) {
    try {
      experiment_spec().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("experiment: ") + e.what());
    }
  }
  if (map.ellipsoid_width && !(*map.ellipsoid_width > 0.0))
    throw ConfigError("map.ellipsoid_width: must be positive");
  if (output.prefix.empty()) throw ConfigError("output.prefix: must be nonempty");
}

RunConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section root(doc, "config");
  root.allow({"channel", "scenario", "solver", "experiment", "output", "map"});
  RunConfig cfg;
  try {
    if (root.has("channel")) parse_channel(root.at("channel"), cfg.channel);
    if (root.has("scenario")) parse_scenario(root.at("scenario"), cfg.scenario, cfg.users);
    if (root.has("solver")) parse_solver_section(root.at("solver"), cfg.solver);
    if (root.has("experiment")) parse_experiment(root.at("experiment"), cfg.experiment);
    if (root.has("output")) parse_output(root.at("output"), cfg.output);
    if (root.has("map")) parse_map(root.at("map"), cfg.map);
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace absplace
