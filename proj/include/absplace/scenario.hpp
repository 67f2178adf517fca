// SPDX-License-Identifier: Apache-2.0
//
// Synthetic urban environments and the Monte Carlo experiment harness.

#ifndef ABSPLACE_SCENARIO_HPP
#define ABSPLACE_SCENARIO_HPP

#include "absplace/channel.hpp"
#include "absplace/geometry.hpp"
#include "absplace/placement.hpp"
#include "absplace/tomography.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace absplace {

struct UrbanSpec {
  double area_x = 500.0;
  double area_y = 400.0;
  /// Streets per axis; buildings fill the bands between streets.
  int streets_per_axis = 9;
  double building_height = 53.0;
  double absorption_db_per_m = 3.0;
  double flight_min = 50.0;
  double flight_max = 150.0;
  /// Top of the SLF grid; must reach flight_max.
  double slf_height = 150.0;
  Index3 slf_dims = Index3(12, 10, 6);
  Index3 flight_dims = Index3(5, 5, 3);
  std::vector<Box3> no_fly;
  /// Allow users inside building footprints (still at ground level).
  bool users_in_buildings = false;

  void validate() const;
};

struct UrbanScenario {
  UrbanSpec spec;
  std::vector<Box3> buildings;
  SlfField slf;
  /// Unfiltered flight lattice; `flight_points[k]` is its point `flight_indices[k]`.
  RegularGrid3 flight_lattice;
  std::vector<Point3> flight_points;
  std::vector<std::size_t> flight_indices;

  bool inside_building(const Point3& p) const;
  bool on_street(double x, double y) const;
};

/// Alternating street / building layout with equal band widths per axis:
/// each axis is split into 2 * streets - 1 bands, even bands are streets.
/// SLF voxels whose centroid lies inside a building get the absorption
/// value; flight points inside buildings, no-fly boxes, or outside the
/// altitude band are dropped. Throws std::runtime_error if none remain.
UrbanScenario build_urban(const UrbanSpec& spec);

/// M i.i.d. uniform ground points on the street area (rejection sampling).
std::vector<Point3> sample_users(const UrbanScenario& scenario, int count, std::uint64_t seed);

enum class SweepVariable { kNumUsers, kBuildingHeight, kMinRate };
std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& name);

enum class SolverKind { kAdmm, kAlphaLp, kExhaustive };
std::string to_string(SolverKind s);
SolverKind parse_solver(const std::string& name);

struct ExperimentSpec {
  SweepVariable sweep = SweepVariable::kMinRate;
  std::vector<double> values;
  int repetitions = 20;
  std::uint64_t seed = 1;
  UrbanSpec scenario;
  ChannelParams channel;
  int num_users = 5;
  std::vector<SolverKind> solvers = {SolverKind::kAdmm};
  PlacementConfig<double> placement;
  bool record_timing = false;

  void validate() const;
};

struct RunRecord {
  double sweep_value = 0.0;
  int repetition = 0;
  SolverKind solver = SolverKind::kAdmm;
  int count = 0;  // N, meaningful only when feasible
  bool feasible = false;
  /// ok | infeasible | guard | error
  std::string status = "ok";
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
};

struct SummaryRow {
  double sweep_value = 0.0;
  SolverKind solver = SolverKind::kAdmm;
  double mean_count = 0.0;
  double stderr_count = 0.0;
  int n_feasible = 0;
  int n_runs = 0;
};

struct ExperimentResult {
  SweepVariable sweep = SweepVariable::kMinRate;
  std::vector<RunRecord> runs;  // ordered by (sweep value, repetition, solver)
  std::vector<SummaryRow> summary;
};

/// Seed for one repetition; stable across platforms. Every sweep value reuses
/// it, so sweep points are compared on the same user draws.
std::uint64_t run_seed(std::uint64_t base, int repetition);

/// Runs every (sweep value, repetition, solver) combination. Repetitions run
/// in parallel; results are merged in a fixed order so output is
/// reproducible. Infeasible runs are recorded and excluded from the means.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Mean and standard error over feasible runs, per (sweep value, solver).
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs,
                                  const std::vector<double>& values,
                                  const std::vector<SolverKind>& solvers);

// sweep_var,sweep_value,repetition,solver,N,feasible,wall_ms,seed,status
void write_runs_csv(std::ostream& os, SweepVariable sweep, const std::vector<RunRecord>& runs,
                    bool record_timing);
// sweep_var,sweep_value,solver,mean_N,stderr,n_feasible,n_runs
void write_summary_csv(std::ostream& os, SweepVariable sweep, const std::vector<SummaryRow>& rows);

}  // namespace absplace

#endif  // ABSPLACE_SCENARIO_HPP
