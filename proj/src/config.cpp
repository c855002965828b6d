#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pnp/cli.hpp"

namespace pnp {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed",
      "grid.dimension", "grid.r_max", "grid.intervals", "grid.spacing", "grid.stretch",
      "potential.kind", "potential.mu", "potential.coefficient", "potential.probe_radius",
      "stationary.mass", "stationary.method", "stationary.tol", "stationary.damping",
      "stationary.max_iterations", "stationary.shooting_tol",
      "evolution.initial", "evolution.profile", "evolution.epsilon", "evolution.variance",
      "evolution.dt", "evolution.t_end", "evolution.coupling_update", "evolution.picard_iterations",
      "evolution.log_every", "evolution.snapshot_every", "evolution.confinement", "evolution.coupling",
      "spectrum.modes", "spectrum.count", "spectrum.method", "spectrum.tol",
      "selfsimilar.offset", "selfsimilar.p", "selfsimilar.q", "selfsimilar.angles",
      "selfsimilar.t0", "selfsimilar.t1",
  };
  return keys;
}

class Entries {
 public:
  explicit Entries(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = values_.at(key);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      throw ConfigError(key + ": not a finite number: '" + s + "'");
    return v;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = values_.at(key);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(key + ": not an integer: '" + s + "'");
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = values_.at(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
  }

  std::string choice(const std::string& key, const std::string& fallback, std::initializer_list<const char*> allowed) const {
    if (!has(key)) return fallback;
    const std::string& s = values_.at(key);
    for (const char* a : allowed)
      if (s == a) return s;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
    throw ConfigError(key + ": expected " + list + ", got '" + s + "'");
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    std::stringstream ss(values_.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const Entries one(std::map<std::string, std::string>{{key, item}});
      out.push_back(static_cast<int>(one.integer(key, 0)));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

Potential PotentialConfig::make() const {
  if (kind == "harmonic") return Potential::harmonic(mu);
  return Potential::logarithmic(coefficient);
}

ExperimentConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::map<std::string, std::string> flat;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      flat[name] = node.data();
      continue;
    }
    for (const auto& [key, leaf] : node) flat[name + "." + key] = leaf.data();
  }
  for (const auto& [k, v] : overrides) flat[k] = v;
  for (const auto& [k, v] : flat) require(known_keys().count(k) > 0, "unknown config key '" + k + "'");

  const Entries e(std::move(flat));
  ExperimentConfig c;

  const long long seed = e.integer("seed", 0);
  require(seed >= 0, "seed: must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);

  c.grid.dimension = static_cast<int>(e.integer("grid.dimension", c.grid.dimension));
  require(c.grid.dimension == 2 || c.grid.dimension == 3, "grid.dimension: must be 2 or 3");
  c.grid.r_max = e.number("grid.r_max", c.grid.r_max);
  require(c.grid.r_max > 0.0, "grid.r_max: must be positive");
  const long long intervals = e.integer("grid.intervals", c.grid.intervals);
  require(intervals >= 16 && intervals <= (1 << 20), "grid.intervals: must lie in [16, 1048576]");
  c.grid.intervals = static_cast<int>(intervals);
  if (e.choice("grid.spacing", "uniform", {"uniform", "graded"}) == "graded") {
    const double q = e.number("grid.stretch", 1.01);
    require(q > 1.0 && q < 1.5, "grid.stretch: must lie in (1, 1.5)");
    c.grid.spacing = SpacingSpec::graded(q);
  } else {
    require(!e.has("grid.stretch"), "grid.stretch: only meaningful with spacing = graded");
  }

  c.potential.kind = e.choice("potential.kind", c.potential.kind, {"harmonic", "logarithmic"});
  c.potential.mu = e.number("potential.mu", c.potential.mu);
  require(c.potential.mu > 0.0, "potential.mu: must be positive");
  c.potential.coefficient = e.number("potential.coefficient", c.potential.coefficient);
  require(c.potential.coefficient > 0.0, "potential.coefficient: must be positive");
  c.potential.probe_radius = e.number("potential.probe_radius", c.potential.probe_radius);
  require(c.potential.probe_radius > 1.25, "potential.probe_radius: must exceed 1.25");

  auto& s = c.stationary;
  s.mass = e.number("stationary.mass", s.mass);
  require(s.mass > 0.0, "stationary.mass: must be positive");
  s.method = e.choice("stationary.method", s.method, {"fixed-point", "shooting"});
  s.fixed_point.tol = e.number("stationary.tol", s.fixed_point.tol);
  require(s.fixed_point.tol > 0.0, "stationary.tol: must be positive");
  s.fixed_point.damping = e.number("stationary.damping", s.fixed_point.damping);
  require(s.fixed_point.damping > 0.0 && s.fixed_point.damping <= 1.0, "stationary.damping: must lie in (0, 1]");
  const long long iters = e.integer("stationary.max_iterations", s.fixed_point.max_iterations);
  require(iters >= 1 && iters <= 100000000, "stationary.max_iterations: must lie in [1, 1e8]");
  s.fixed_point.max_iterations = static_cast<int>(iters);
  s.shooting_tol = e.number("stationary.shooting_tol", s.shooting_tol);
  require(s.shooting_tol > 0.0, "stationary.shooting_tol: must be positive");

  auto& ev = c.evolution;
  ev.initial = e.choice("evolution.initial", ev.initial, {"perturbation", "gaussian"});
  ev.profile = e.choice("evolution.profile", ev.profile, {"quadratic", "random"});
  ev.epsilon = e.number("evolution.epsilon", ev.epsilon);
  require(ev.epsilon > 0.0 && ev.epsilon < 1.0, "evolution.epsilon: must lie in (0, 1)");
  ev.variance = e.number("evolution.variance", ev.variance);
  require(ev.variance > 0.0, "evolution.variance: must be positive");
  ev.dt = e.number("evolution.dt", ev.dt);
  require(ev.dt > 0.0, "evolution.dt: must be positive");
  ev.t_end = e.number("evolution.t_end", ev.t_end);
  require(ev.t_end > 0.0, "evolution.t_end: must be positive");
  require(ev.t_end / ev.dt <= 1e8, "evolution: more than 1e8 steps requested");
  ev.coupling_update = e.choice("evolution.coupling_update", "lagged", {"lagged", "picard"}) == "picard"
                           ? CouplingUpdate::picard
                           : CouplingUpdate::lagged;
  const long long picard = e.integer("evolution.picard_iterations", ev.picard_iterations);
  require(picard >= 1 && picard <= 100, "evolution.picard_iterations: must lie in [1, 100]");
  ev.picard_iterations = static_cast<int>(picard);
  const long long log_every = e.integer("evolution.log_every", ev.log_every);
  require(log_every >= 1 && log_every <= 100000000, "evolution.log_every: must be >= 1");
  ev.log_every = static_cast<int>(log_every);
  const long long snap = e.integer("evolution.snapshot_every", ev.snapshot_every);
  require(snap >= 0 && snap <= 100000000, "evolution.snapshot_every: must be >= 0");
  ev.snapshot_every = static_cast<int>(snap);
  ev.confinement = e.flag("evolution.confinement", ev.confinement);
  ev.coupling = e.flag("evolution.coupling", ev.coupling);

  auto& sp = c.spectrum;
  sp.modes = e.int_list("spectrum.modes", sp.modes);
  for (int k : sp.modes) require(k >= 0 && k <= 64, "spectrum.modes: modes must lie in [0, 64]");
  const long long count = e.integer("spectrum.count", sp.count);
  require(count >= 1 && count <= 20, "spectrum.count: must lie in [1, 20]");
  sp.count = static_cast<int>(count);
  sp.method = e.choice("spectrum.method", sp.method, {"matrix", "shoot"});
  sp.tol = e.number("spectrum.tol", sp.tol);
  require(sp.tol > 0.0, "spectrum.tol: must be positive");

  auto& ss = c.selfsimilar;
  ss.offset = e.number("selfsimilar.offset", ss.offset);
  ss.p = e.number("selfsimilar.p", ss.p);
  require(ss.p > 1.0, "selfsimilar.p: must exceed 1");
  ss.q = e.number("selfsimilar.q", ss.q);
  require(ss.q >= 2.0, "selfsimilar.q: must be >= 2");
  const long long angles = e.integer("selfsimilar.angles", ss.angles);
  require(angles >= 8 && angles <= 4096, "selfsimilar.angles: must lie in [8, 4096]");
  ss.angles = static_cast<int>(angles);
  ss.t0 = e.number("selfsimilar.t0", ss.t0);
  ss.t1 = e.number("selfsimilar.t1", ss.t1);
  require(ss.t0 >= 0.0 && ss.t1 > ss.t0, "selfsimilar: need 0 <= t0 < t1");
  require((1.0 + 2.0 * ss.t1) / (1.0 + 2.0 * ss.t0) >= 10.0, "selfsimilar: window must span a decade of 1 + 2t");
  return c;
}

void validate_for(const ExperimentConfig& c, const std::string& command) {
  const bool harmonic2d = c.potential.kind == "harmonic" && c.grid.dimension == 2;
  if (command == "stationary" && c.stationary.method == "shooting")
    require(harmonic2d, "stationary: shooting needs a harmonic potential in d = 2");
  if (command == "spectrum" && c.spectrum.method == "shoot") {
    require(harmonic2d, "spectrum: shooting needs a harmonic potential in d = 2");
    require(c.spectrum.modes == std::vector<int>{0}, "spectrum: shooting covers the radial mode only (modes = 0)");
    require(c.spectrum.count == 1, "spectrum: shooting returns one eigenvalue (count = 1)");
  }
  if (command == "evolve" && c.evolution.initial == "perturbation")
    require(c.evolution.confinement, "evolve: a perturbation of the stationary state needs confinement");
  if (command == "rates") {
    require(c.evolution.confinement && c.evolution.coupling, "rates: needs the full confined system");
    require(c.evolution.initial == "perturbation", "rates: initial must be perturbation");
  }
  if (command == "selfsimilar") {
    require(harmonic2d && c.potential.mu == 1.0, "selfsimilar: needs the harmonic potential with mu = 1 in d = 2");
    require(c.evolution.confinement && c.evolution.coupling, "selfsimilar: needs the full confined system");
  }
}

}  // namespace pnp
