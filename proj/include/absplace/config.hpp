// SPDX-License-Identifier: Apache-2.0
//
// Run configuration shared by every CLI subcommand. The document is JSON;
// see docs/config.md for the schema.

#ifndef ABSPLACE_CONFIG_HPP
#define ABSPLACE_CONFIG_HPP

#include "absplace/channel.hpp"
#include "absplace/geometry.hpp"
#include "absplace/placement.hpp"
#include "absplace/scenario.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace absplace {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OutputSpec {
  std::string dir = ".";
  std::string prefix = "absplace";
  /// Wall times are written as 0 unless set, keeping outputs reproducible.
  bool record_timing = false;
};

struct MapSpec {
  std::optional<Point3> tx;
  std::optional<Point3> rx;
  /// Ellipsoid minor-axis width; unset means one wavelength.
  std::optional<double> ellipsoid_width;
};

struct RunConfig {
  ChannelParams channel;
  UrbanSpec scenario;
  /// Explicit user positions; when empty, users are sampled from the streets.
  std::vector<Point3> users;
  PlacementConfig<double> solver;
  ExperimentSpec experiment;
  OutputSpec output;
  MapSpec map;

  /// Experiment spec with the shared channel, scenario and solver sections.
  ExperimentSpec experiment_spec() const;
  /// Throws ConfigError on any inconsistent field.
  void validate() const;
};

/// Parses and validates a configuration document. Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace absplace

#endif  // ABSPLACE_CONFIG_HPP
