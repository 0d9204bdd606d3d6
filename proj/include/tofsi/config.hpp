#pragma once

#include <string>

#include "tofsi/coupler.hpp"
#include "tofsi/grid.hpp"
#include "tofsi/material.hpp"
#include "tofsi/mma.hpp"

namespace tofsi {

// Full run description. Defaults reproduce the benchmark channel problem
// with the reference constants; every entry is overridable through the flat
// key-value config file (dotted keys, e.g. "physics.mu = 1.0").
struct RunConfig {
  GeometryConfig geometry;
  FluidProperties fluid;
  SolidProperties solid;
  InterpolationParams interpolation;
  ProjectionParams projection;
  CouplerConfig coupler;
  MmaSettings mma;

  double volume_fraction = 0.1;
  int iterations = 100;
  int snapshot_every = 10;
  bool mesh_deformation = true;
  std::string output_dir = "out";

  void validate() const;
};

// Parses `text` over the defaults. Lines are "key = value"; '#' starts a
// comment. Unknown keys, malformed values, and invariant violations raise
// ConfigError naming the key.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

// Canonical echo of the fully resolved configuration; parsing it reproduces
// the run.
std::string echo_config(const RunConfig& cfg);

Model build_model(const RunConfig& cfg);

}  // namespace tofsi
