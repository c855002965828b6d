// Batch front end: INI experiment configs, command dispatch and outputs.
//
//   pnp-lab <command> --config <path> [--out <dir>] [--sweep key=v1,v2,...]
//           [--method <name>] [--modes 0,1,2]
//
// Exit codes: 0 success, 1 failed scientific check, 2 usage or validation
// error, 3 solver non-convergence.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnp/evolution.hpp"
#include "pnp/grid.hpp"
#include "pnp/selfsimilar.hpp"
#include "pnp/stationary.hpp"

namespace pnp {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2, exit_no_convergence = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  int dimension = 2;
  double r_max = 9.0;
  int intervals = 1024;
  SpacingSpec spacing;
};

struct PotentialConfig {
  std::string kind = "harmonic";  // harmonic | logarithmic
  double mu = 1.0;
  double coefficient = 3.0;
  double probe_radius = 50.0;

  Potential make() const;
};

struct StationaryConfig {
  double mass = 6.283185307179586;
  std::string method = "fixed-point";  // fixed-point | shooting
  FixedPointOptions fixed_point;
  double shooting_tol = 1e-13;
};

struct EvolutionSection {
  std::string initial = "perturbation";  // perturbation | gaussian
  std::string profile = "quadratic";     // quadratic | random
  double epsilon = 0.5;
  double variance = 0.5;
  double dt = 1e-3;
  double t_end = 10.0;
  CouplingUpdate coupling_update = CouplingUpdate::lagged;
  int picard_iterations = 3;
  int log_every = 10;
  int snapshot_every = 0;
  bool confinement = true;
  bool coupling = true;
};

struct SpectrumConfig {
  std::vector<int> modes{0, 1};
  int count = 3;
  std::string method = "matrix";  // matrix | shoot
  double tol = 1e-9;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  GridConfig grid;
  PotentialConfig potential;
  StationaryConfig stationary;
  EvolutionSection evolution;
  SpectrumConfig spectrum;
  AsymptoticsOptions selfsimilar;
};

/// Parses INI text. overrides maps "section.key" (or a top-level "key") to a
/// value and replaces the file's entry. Unknown keys, malformed values and
/// out-of-range numbers throw ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});

/// Command-specific checks on top of parse_config. Throws ConfigError.
void validate_for(const ExperimentConfig& cfg, const std::string& command);

/// Initial density for evolve, rates and selfsimilar.
RadialField initial_density(const ExperimentConfig& cfg, const StationaryState* reference, const GridPtr& grid);

/// Runs one command; JSON summary goes to out, files into out_dir when it is
/// nonempty. Returns the exit code. Config errors must be caught beforehand.
int run_command(const std::string& command, const ExperimentConfig& cfg, const std::string& out_dir,
                std::ostream& out);

/// Full command-line entry point.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pnp
