#include "pnp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "pnp/diagnostics.hpp"
#include "pnp/numerics.hpp"
#include "pnp/potentials.hpp"
#include "pnp/spectral.hpp"

namespace pnp {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands = {"check-potential", "stationary", "evolve",
                                            "spectrum",        "rates",      "selfsimilar"};

GridPtr build_grid(const ExperimentConfig& c) {
  return make_grid(c.grid.dimension, c.grid.r_max, c.grid.intervals, c.grid.spacing);
}

StationaryState reference_state(const ExperimentConfig& c, const GridPtr& grid) {
  return solve_fixed_point(c.potential.make(), c.stationary.mass, grid, c.stationary.fixed_point);
}

void write_text(const std::string& out_dir, const std::string& name, const std::string& text) {
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  std::ofstream f(out_dir + "/" + name);
  if (!f) throw std::runtime_error("cannot write " + out_dir + "/" + name);
  f << text << '\n';
}

void emit(std::ostream& out, const std::string& out_dir, const std::string& name, const json& j) {
  const std::string text = j.dump(2);
  out << text << '\n';
  write_text(out_dir, name, text);
}

int cmd_check_potential(const ExperimentConfig& c, const std::string& out_dir, std::ostream& out) {
  const ConditionsReport rep = check_conditions(c.potential.make(), c.stationary.mass, c.grid.dimension,
                                                c.potential.probe_radius);
  json j = json::parse(rep.to_json());
  j["all_passed"] = rep.all_passed();
  emit(out, out_dir, "conditions.json", j);
  return rep.all_passed() ? exit_ok : exit_check_failed;
}

int cmd_stationary(const ExperimentConfig& c, const std::string& out_dir, std::ostream& out) {
  const GridPtr grid = build_grid(c);
  const Potential phi = c.potential.make();
  StationaryState st = [&] {
    if (c.stationary.method == "fixed-point") return reference_state(c, grid);
    const ShootingSolution sol = solve_shooting(c.potential.mu, c.stationary.mass, grid, c.stationary.shooting_tol);
    return make_state(reconstruct_density(sol), phi);
  }();
  if (!out_dir.empty()) write_state(st, out_dir, c.stationary.method);
  json j;
  j["method"] = c.stationary.method;
  j["M"] = st.mass;
  j["lambda"] = st.lagrange_lambda;
  j["residual"] = st.residual;
  j["free_energy"] = st.free_energy;
  j["iterations"] = st.iterations;
  j["n_inf_at_origin"] = st.n_inf[0];
  out << j.dump(2) << '\n';
  return exit_ok;
}

bool free_energy_nonincreasing(const std::vector<DiagnosticSample>& rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double slack = 1e-12 * std::max(1.0, std::abs(rows[k - 1].free_energy));
    if (rows[k].free_energy > rows[k - 1].free_energy + slack) return false;
  }
  return true;
}

EvolutionConfig evolution_config(const ExperimentConfig& c, RadialField n0) {
  EvolutionConfig ec(std::move(n0));
  ec.potential = c.potential.make();
  ec.dt = c.evolution.dt;
  ec.t_end = c.evolution.t_end;
  ec.coupling_update = c.evolution.coupling_update;
  ec.picard_iterations = c.evolution.picard_iterations;
  ec.log_every = c.evolution.log_every;
  ec.snapshot_every = c.evolution.snapshot_every;
  ec.terms.confinement = c.evolution.confinement;
  ec.terms.coupling = c.evolution.coupling;
  return ec;
}

int cmd_evolve(const ExperimentConfig& c, const std::string& out_dir, std::ostream& out) {
  const GridPtr grid = build_grid(c);
  std::optional<StationaryState> st;
  if (c.evolution.confinement && c.evolution.coupling) st = reference_state(c, grid);
  EvolutionConfig ec = evolution_config(c, initial_density(c, st ? &*st : nullptr, grid));
  ec.reference = st;
  const EvolutionTrajectory traj = run(ec);
  if (!out_dir.empty()) write_trajectory(traj, out_dir);

  const auto& d = traj.diagnostics;
  const double drift = std::abs(d.back().mass / d.front().mass - 1.0);
  const bool monotone = free_energy_nonincreasing(d);
  json j;
  j["steps"] = traj.steps;
  j["rejected"] = traj.rejected;
  j["final_time"] = traj.final_time;
  j["reached_floor"] = traj.reached_floor;
  j["mass_initial"] = d.front().mass;
  j["mass_final"] = d.back().mass;
  j["mass_drift"] = drift;
  j["free_energy_nonincreasing"] = monotone;
  if (d.size() >= 3) {
    const DissipationReport dr = dissipation_check(traj);
    j["dissipation_defect"] = dr.max_defect;
  }
  emit(out, out_dir, "summary.json", j);
  return drift <= 1e-10 && monotone ? exit_ok : exit_check_failed;
}

void write_eigenfunction(const SpectralResult& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "r,f,gc\n";
  const RadialGrid& g = r.f.grid();
  for (std::size_t i = 0; i < g.size(); ++i)
    f << format_number(g.node(i)) << ',' << format_number(r.f[i]) << ',' << format_number(r.gc[i]) << '\n';
}

int cmd_spectrum(const ExperimentConfig& c, const std::string& out_dir, std::ostream& out) {
  const GridPtr grid = build_grid(c);
  const StationaryState st = reference_state(c, grid);
  std::vector<SpectralResult> all;
  for (int k : c.spectrum.modes) {
    if (c.spectrum.method == "shoot") {
      const double mu = c.potential.mu;
      all.push_back(radial_eigen_shoot(st, mu, 0.5 * mu, 3.0 * mu));
    } else {
      auto r = mode_eigen_matrix(LinearizedOperator(st, k), c.spectrum.count, c.seed, c.spectrum.tol);
      for (auto& e : r) all.push_back(std::move(e));
    }
  }
  json arr = json::array();
  std::map<int, int> index;
  for (const auto& r : all) {
    arr.push_back(json::parse(to_json(r)));
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_eigenfunction(r, out_dir + "/eigen_k" + std::to_string(r.k) + "_" + std::to_string(index[r.k]++) + ".csv");
    }
  }
  emit(out, out_dir, "spectrum.json", arr);
  return exit_ok;
}

int cmd_rates(const ExperimentConfig& c, const std::string& out_dir, std::ostream& out) {
  const GridPtr grid = build_grid(c);
  const StationaryState st = reference_state(c, grid);
  EvolutionConfig ec = evolution_config(c, initial_density(c, &st, grid));
  ec.reference = st;
  const EvolutionTrajectory traj = run(ec);
  const RateFit fit = fit_rates(traj.diagnostics);
  const double radial = mode_eigen_matrix(LinearizedOperator(st, 0), 1, c.seed).front().lambda;
  const double translation = mode_eigen_matrix(LinearizedOperator(st, 1), 1, c.seed).front().lambda;
  const double gap = std::min(radial, translation);
  const double predicted = 2.0 * radial;
  const double rel = std::abs(fit.weighted_l2.rate / predicted - 1.0);
  const bool envelope = fit.l1.rate >= 0.9 * 0.5 * fit.weighted_l2.rate;
  const bool passed = rel <= 0.05 && envelope;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir + "/diagnostics.csv");
    write_diagnostics_csv(traj.diagnostics, f);
  }
  json j;
  j["weighted_l2_rate"] = fit.weighted_l2.rate;
  j["weighted_l2_fit_quality"] = fit.weighted_l2.fit_quality;
  j["l1_rate"] = fit.l1.rate;
  j["window"] = {fit.t0, fit.t1};
  j["samples"] = fit.weighted_l2.samples;
  j["radial_eigenvalue"] = radial;
  j["translation_eigenvalue"] = translation;
  j["gap"] = gap;
  j["predicted_Lambda"] = 2.0 * gap;
  j["predicted_radial_rate"] = predicted;
  j["relative_error"] = rel;
  j["l1_envelope_ok"] = envelope;
  j["passed"] = passed;
  emit(out, out_dir, "rates.json", j);
  return passed ? exit_ok : exit_check_failed;
}

int cmd_selfsimilar(const ExperimentConfig& c, const std::string& out_dir, std::ostream& out) {
  const GridPtr grid = build_grid(c);
  const StationaryState st = reference_state(c, grid);
  EvolutionConfig ec = evolution_config(c, initial_density(c, &st, grid));
  // confined time needed to cover t1, with a little room for the last log
  ec.t_end = SelfSimilarMap(1.0).confined_time(c.selfsimilar.t1) + 20.0 * c.evolution.log_every * c.evolution.dt;
  ec.snapshot_every = 1;
  const EvolutionTrajectory traj = run(ec);
  const AsymptoticsReport rep = intermediate_asymptotics_check(traj.snapshots, st, c.selfsimilar);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir + "/asymptotics.csv");
    f << 't';
    for (const auto& n : rep.norms) f << ',' << n.norm;
    f << '\n';
    for (std::size_t i = 0; i < rep.norms.front().values.size(); ++i) {
      f << format_number(rep.norms.front().values[i].first);
      for (const auto& n : rep.norms) f << ',' << format_number(n.values[i].second);
      f << '\n';
    }
  }
  const bool passed = std::abs(rep.find("L1").fit.exponent + 0.5) <= 0.05 &&
                      std::abs(rep.find("grad_v_L2").fit.exponent + 0.5) <= 0.05;
  emit(out, out_dir, "asymptotics.json", json::parse(rep.to_json()));
  return passed ? exit_ok : exit_check_failed;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// Refuses paths whose nearest existing ancestor is not a writable directory.
void check_writable(const std::string& dir) {
  if (dir.empty()) return;
  fs::path p = fs::absolute(dir);
  if (fs::exists(p) && !fs::is_directory(p)) throw ConfigError("--out: " + dir + " exists and is not a directory");
  while (!fs::exists(p)) p = p.parent_path();
  if (!fs::is_directory(p) || ::access(p.c_str(), W_OK) != 0) throw ConfigError("--out: " + dir + " is not writable");
}

struct Job {
  std::string name;
  ExperimentConfig config;
  std::string out_dir;
  std::string output;
  std::string errors;
  int code = 0;
};

void execute(const std::string& command, Job& job) {
  std::ostringstream out;
  try {
    job.code = run_command(command, job.config, job.out_dir, out);
  } catch (const ConvergenceError& e) {
    json j;
    j["error"] = "non-convergence";
    j["message"] = e.what();
    j["last_residual"] = e.last_residual;
    j["iterations"] = e.iterations;
    out << j.dump(2) << '\n';
    job.code = exit_no_convergence;
  } catch (const StepRejected& e) {
    json j;
    j["error"] = "non-convergence";
    j["message"] = e.what();
    out << j.dump(2) << '\n';
    job.code = exit_no_convergence;
  } catch (const std::exception& e) {
    job.errors = std::string("error: ") + e.what() + '\n';
    job.code = exit_usage;
  }
  job.output = out.str();
}

int worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PNP_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*env == '\0' || *end != '\0' || v < 1) throw ConfigError("PNP_LAB_THREADS must be a positive integer");
    n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<int>(std::min<std::size_t>(n, jobs));
}

}  // namespace

RadialField initial_density(const ExperimentConfig& c, const StationaryState* reference, const GridPtr& grid) {
  if (c.evolution.initial == "perturbation") {
    if (!reference) throw std::invalid_argument("initial_density: perturbation needs a reference state");
    const RadialField f = c.evolution.profile == "quadratic"
                              ? RadialField::sample(grid, [](double r) { return r * r; })
                              : random_radial_profile(grid, c.seed);
    return perturbed_density(*reference, f, c.evolution.epsilon);
  }
  const double var = c.evolution.variance;
  RadialField n = RadialField::sample(grid, [var](double r) { return std::exp(-r * r / (2.0 * var)); });
  const double target = reference ? reference->mass : c.stationary.mass;
  const double scale = target / integrate(n);
  for (double& v : n.values()) v *= scale;
  return n;
}

int run_command(const std::string& command, const ExperimentConfig& cfg, const std::string& out_dir,
                std::ostream& out) {
  if (command == "check-potential") return cmd_check_potential(cfg, out_dir, out);
  if (command == "stationary") return cmd_stationary(cfg, out_dir, out);
  if (command == "evolve") return cmd_evolve(cfg, out_dir, out);
  if (command == "spectrum") return cmd_spectrum(cfg, out_dir, out);
  if (command == "rates") return cmd_rates(cfg, out_dir, out);
  if (command == "selfsimilar") return cmd_selfsimilar(cfg, out_dir, out);
  throw ConfigError("unknown command '" + command + "'");
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confined drift-diffusion-Poisson experiments in radial symmetry.", "pnp-lab"};
  std::string command, config_path, out_dir, method, modes;
  std::vector<std::string> sweeps;
  app.add_option("command", command, "check-potential | stationary | evolve | spectrum | rates | selfsimilar")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "INI experiment config")->required();
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--sweep", sweeps, "section.key=v1,v2,... (repeatable; runs the product)");
  app.add_option("--method", method, "fixed-point | shooting (stationary), matrix | shoot (spectrum)");
  app.add_option("--modes", modes, "Comma-separated angular modes for spectrum");
  app.footer("Exit codes: 0 success, 1 failed check, 2 usage or validation, 3 non-convergence.\n"
             "PNP_LAB_THREADS caps the number of concurrent sweep runs.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  std::vector<Job> jobs;
  int workers = 1;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
    std::stringstream text;
    text << in.rdbuf();

    std::map<std::string, std::string> base;
    if (!method.empty()) base[command == "spectrum" ? "spectrum.method" : "stationary.method"] = method;
    if (!modes.empty()) base["spectrum.modes"] = modes;

    std::vector<std::pair<std::string, std::map<std::string, std::string>>> combos{{"", base}};
    for (const auto& sw : sweeps) {
      const auto eq = sw.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == sw.size())
        throw ConfigError("--sweep: expected key=v1,v2,..., got '" + sw + "'");
      const std::string key = sw.substr(0, eq);
      const auto values = split(sw.substr(eq + 1), ',');
      std::vector<std::pair<std::string, std::map<std::string, std::string>>> next;
      for (const auto& [name, ov] : combos) {
        for (const auto& v : values) {
          if (v.empty()) throw ConfigError("--sweep: empty value in '" + sw + "'");
          auto o = ov;
          o[key] = v;
          next.emplace_back(name + (name.empty() ? "" : "_") + key + "=" + v, std::move(o));
        }
      }
      combos = std::move(next);
    }
    if (!sweeps.empty() && out_dir.empty()) throw ConfigError("--sweep requires --out");
    check_writable(out_dir);
    for (const auto& [name, ov] : combos) {
      Job job;
      job.name = name;
      job.config = parse_config(text.str(), ov);
      validate_for(job.config, command);
      job.out_dir = name.empty() ? out_dir : (fs::path(out_dir) / name).string();
      jobs.push_back(std::move(job));
    }
    workers = worker_count(jobs.size());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n' << "run 'pnp-lab --help' for usage\n";
    return exit_usage;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) execute(command, jobs[i]);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int code = exit_ok;
  for (const auto& j : jobs) code = std::max(code, j.code);
  if (sweeps.empty()) {
    out << jobs.front().output;
    err << jobs.front().errors;
    return code;
  }
  json summary = json::array();
  for (const auto& j : jobs) {
    err << j.errors;
    json entry;
    entry["run"] = j.name;
    entry["exit_code"] = j.code;
    entry["result"] = json::parse(j.output, nullptr, false);
    if (entry["result"].is_discarded()) entry["result"] = nullptr;
    summary.push_back(entry);
  }
  out << summary.dump(2) << '\n';
  return code;
}

}  // namespace pnp
