// Acceptance suite: one line per criterion, exit status 0 iff all pass.
//
//   acceptance --golden <tests/golden> --tool <pnp-lab>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "pnp/diagnostics.hpp"
#include "pnp/evolution.hpp"
#include "pnp/selfsimilar.hpp"
#include "pnp/spectral.hpp"
#include "pnp/stationary.hpp"

using namespace pnp;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tolerances, fixed here and nowhere else.
constexpr double kC1DensityTol = 1e-5;
constexpr double kC1ResidualTol = 1e-8;
constexpr double kC1MassTol = 1e-10;
constexpr double kC1Seconds = 10.0;
constexpr double kC2Tol = 1e-4;
constexpr double kC3LambdaTol = 1e-3;
constexpr double kC3ExplicitTol = 1e-6;
constexpr double kC4LambdaTol = 1e-3;
constexpr double kC4ExplicitTol = 1e-5;
constexpr double kC5Slack = 1e-10;
constexpr int kC5Samples = 50;
constexpr double kC6Tol = 1e-8;
constexpr int kC6Pairs = 100;
constexpr double kC7MassTol = 1e-10;
constexpr int kC7Steps = 10000;
constexpr double kC7HalvingRatio = 1.8;
constexpr double kC8Low = 3.8, kC8High = 4.2;
constexpr double kC8Seconds = 120.0;
constexpr double kC9Fraction = 0.9;
constexpr double kC10Tol = 0.05;
constexpr double kC11EigenTol = 1e-3;
constexpr double kC11RateTol = 0.02;

// Production resolution: d = 2, harmonic mu, uniform grid with R_max = 9 / sqrt(mu).
constexpr int kN = 2048;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridPtr harmonic_grid(double mu, int N) { return make_grid(2, 9.0 / std::sqrt(mu), N, SpacingSpec::uniform()); }

StationaryState harmonic_state(double mu, int N, double M = kTwoPi) {
  return solve_fixed_point(Potential::harmonic(mu), M, harmonic_grid(mu, N));
}

// Random smooth profile on mode k, made admissible.
RadialField random_mode_f(const LinearizedOperator& op, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), w = 0.3 + std::abs(u(rng));
  const int k = op.mode();
  return op.admissible(RadialField::sample(op.grid_ptr(), [&](double r) {
    return std::pow(r, k) * (a + b * std::cos(w * r) + c * r * r * std::exp(-r * r / 4));
  }));
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const StationaryState st = harmonic_state(1.0, kN);
  const ShootingSolution sol = solve_shooting(1.0, kTwoPi, st.grid_ptr());
  const RadialField ns = reconstruct_density(sol);
  const double elapsed = seconds_since(t0);
  double err = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (st.grid().node(i) <= 0.8 * st.grid().r_max()) err = std::max(err, std::abs(ns[i] / st.n_inf[i] - 1.0));
  const double mass = std::abs(integrate(st.n_inf) / kTwoPi - 1.0);
  const bool pass = err <= kC1DensityTol && st.residual <= kC1ResidualTol && mass <= kC1MassTol && elapsed <= kC1Seconds;
  return {pass, "density sup-rel " + fmt("%.2e", err) + ", residual " + fmt("%.2e", st.residual) + ", mass err " +
                    fmt("%.2e", mass) + ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome criterion2() {
  const double M = 1e-6;
  double worst = 0.0;
  for (int d : {2, 3}) {
    auto g = make_grid(d, 9.0, kN, SpacingSpec::uniform());
    auto st = solve_fixed_point(Potential::harmonic(1.0), M, g);
    const double Z = std::pow(kTwoPi, 0.5 * d);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double r = g->node(i);
      worst = std::max(worst, std::abs(st.n_inf[i] / (M * std::exp(-0.5 * r * r) / Z) - 1.0));
    }
  }
  return {worst <= kC2Tol, "sup-rel deviation from M e^{-phi} / int e^{-phi} " + fmt("%.2e", worst) + " (d = 2, 3)"};
}

Outcome criterion3() {
  double lam = 0.0, expl = 0.0;
  for (double mu : {0.5, 1.0, 2.0}) {
    const StationaryState st = harmonic_state(mu, kN);
    const auto r = radial_eigen_shoot(st, mu, 0.5 * mu, 3.0 * mu);
    lam = std::max(lam, std::abs(r.lambda / (2.0 * mu) - 1.0));
    expl = std::max(expl, explicit_radial_residual(st, mu));
  }
  return {lam <= kC3LambdaTol && expl <= kC3ExplicitTol,
          "max |lambda / 2mu - 1| " + fmt("%.2e", lam) + " over mu = 0.5, 1, 2; explicit residual " + fmt("%.2e", expl)};
}

Outcome criterion4() {
  const StationaryState st = harmonic_state(1.0, kN);
  LinearizedOperator op1(st, 1);
  const double l1 = mode_eigen_matrix(op1, 1).front().lambda;
  const double l2 = mode_eigen_matrix(LinearizedOperator(st, 2), 1).front().lambda;
  const double res = op1.residual(translation_mode(st, 1.0), 1.0);
  const double rel = std::abs(l1 - 1.0);
  return {rel <= kC4LambdaTol && res <= kC4ExplicitTol && l2 > l1,
          "k=1 lambda " + fmt("%.7f", l1) + ", explicit residual " + fmt("%.2e", res) + ", k=2 lambda " + fmt("%.5f", l2)};
}

Outcome criterion5() {
  const StationaryState st = harmonic_state(1.0, kN);
  const double mu = 1.0;
  std::vector<LinearizedOperator> ops;
  for (int k = 0; k <= 3; ++k) ops.emplace_back(st, k);
  std::mt19937_64 rng(2024);
  // a general perturbation is a sum over angular modes; Q1 and Q2 add up mode by mode
  int violations = 0;
  double worst_general = 1e300, worst_radial = 1e300;
  for (int s = 0; s < kC5Samples; ++s) {
    double Q1 = 0.0, Q2 = 0.0;
    for (const auto& op : ops) {
      const auto f = random_mode_f(op, rng);
      Q1 += op.q1(f);
      Q2 += op.q2(f);
    }
    worst_general = std::min(worst_general, Q2 / Q1);
    if (Q2 < mu * Q1 - kC5Slack * Q1) ++violations;
  }
  for (int s = 0; s < kC5Samples; ++s) {
    const auto f = random_mode_f(ops[0], rng);
    const double Q1 = ops[0].q1(f), Q2 = ops[0].q2(f);
    worst_radial = std::min(worst_radial, Q2 / Q1);
    if (Q2 < 2.0 * mu * Q1 - kC5Slack * Q1) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations; min Q2/Q1 " + fmt("%.5f", worst_general) +
                               " (general), " + fmt("%.5f", worst_radial) + " (radial)"};
}

Outcome criterion6() {
  const StationaryState st = harmonic_state(1.0, kN);
  std::mt19937_64 rng(77);
  double adj = 0.0, diss = 0.0;
  for (int p = 0; p < kC6Pairs; ++p) {
    LinearizedOperator op(st, p % 3);
    const auto f1 = random_mode_f(op, rng), f2 = random_mode_f(op, rng);
    const auto L1 = op.apply(f1), L2 = op.apply(f2);
    adj = std::max(adj, std::abs(op.inner(f1, L2) - op.inner(L1, f2)) / std::sqrt(op.q1(f1) * op.q1(f2)));
    diss = std::max(diss, std::abs(-op.inner(f1, L1) / op.q2(f1) - 1.0));
  }
  return {adj <= kC6Tol && diss <= kC6Tol,
          "self-adjointness defect " + fmt("%.2e", adj) + ", |-<f,Lf>/Q2 - 1| " + fmt("%.2e", diss)};
}

EvolutionConfig radial_run(const StationaryState& st, double dt, double t_end, int log_every) {
  EvolutionConfig cfg(perturbed_density(st, RadialField::sample(st.grid_ptr(), [](double r) { return r * r; }), 0.1));
  cfg.potential = st.potential;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.log_every = log_every;
  cfg.reference = st;
  return cfg;
}

Outcome criterion7() {
  const StationaryState st = harmonic_state(1.0, 512);
  const double dt = 5e-4;
  auto cfg = radial_run(st, dt, kC7Steps * dt, 1);
  cfg.stop_below = 0.0;
  const auto coarse = run(cfg);
  cfg.dt = 0.5 * dt;
  const auto fine = run(cfg);
  const auto& d = coarse.diagnostics;
  const double drift = std::abs(d.back().mass / d.front().mass - 1.0);
  bool monotone = true;
  for (std::size_t k = 1; k < d.size(); ++k)
    if (d[k].free_energy > d[k - 1].free_energy + 1e-12 * std::abs(d[k - 1].free_energy)) monotone = false;
  const double a = dissipation_check(coarse).max_defect, b = dissipation_check(fine).max_defect;
  return {coarse.steps >= kC7Steps && drift <= kC7MassTol && monotone && a / b >= kC7HalvingRatio,
          std::to_string(coarse.steps) + " steps, mass drift " + fmt("%.2e", drift) +
              (monotone ? ", F nonincreasing" : ", F increased") + ", defect " + fmt("%.2e", a) + " -> " +
              fmt("%.2e", b) + " (ratio " + fmt("%.2f", a / b) + ")"};
}

struct RateRun {
  RateFit fit;
  double seconds;
};

RateRun rate_run(int N) {
  const auto t0 = std::chrono::steady_clock::now();
  const StationaryState st = harmonic_state(1.0, N);
  const auto traj = run(radial_run(st, 1e-3, 10.0, 10));
  return {fit_rates(traj.diagnostics), seconds_since(t0)};
}

const RateRun& rates_1024() {
  static const RateRun r = rate_run(1024);
  return r;
}

Outcome criterion8() {
  const auto& r = rates_1024();
  const double rate = r.fit.weighted_l2.rate;
  return {rate >= kC8Low && rate <= kC8High && r.seconds <= kC8Seconds,
          "weighted L2 rate " + fmt("%.4f", rate) + " on [" + fmt("%.2f", r.fit.t0) + ", " + fmt("%.2f", r.fit.t1) +
              "], " + fmt("%.2f", r.seconds) + " s"};
}

Outcome criterion9() {
  const auto& r = rates_1024();
  const double l1 = r.fit.l1.rate, half = 0.5 * r.fit.weighted_l2.rate;
  return {l1 >= kC9Fraction * half, "L1 rate " + fmt("%.4f", l1) + " vs half weighted-L2 rate " + fmt("%.4f", half)};
}

Outcome criterion10() {
  const StationaryState st = harmonic_state(1.0, 1024);
  auto n0 = RadialField::sample(st.grid_ptr(), [](double r) { return std::exp(-r * r); });
  const double scale = st.mass / integrate(n0);
  for (double& v : n0.values()) v *= scale;
  EvolutionConfig cfg(n0);
  cfg.dt = 1e-3;
  cfg.t_end = 6.0;
  cfg.log_every = 20;
  cfg.snapshot_every = 1;
  const auto traj = run(cfg);
  const auto rep = intermediate_asymptotics_check(traj.snapshots, st);
  const double l1 = rep.find("L1").fit.exponent, g2 = rep.find("grad_v_L2").fit.exponent;
  return {std::abs(l1 + 0.5) <= kC10Tol && std::abs(g2 + 0.5) <= kC10Tol,
          "L1 exponent " + fmt("%.4f", l1) + ", grad-L2 exponent " + fmt("%.4f", g2) + " on (1+2t) in [51, 1e5]"};
}

Outcome criterion11() {
  double eig = 0.0;
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto a = harmonic_state(mu, 1024), b = harmonic_state(mu, 2048);
    eig = std::max(eig, std::abs(radial_eigen_shoot(a, mu, 0.5 * mu, 3 * mu).lambda /
                                     radial_eigen_shoot(b, mu, 0.5 * mu, 3 * mu).lambda - 1.0));
    if (mu != 1.0) continue;
    for (int k : {0, 1}) {
      const double la = mode_eigen_matrix(LinearizedOperator(a, k), 1).front().lambda;
      const double lb = mode_eigen_matrix(LinearizedOperator(b, k), 1).front().lambda;
      eig = std::max(eig, std::abs(la / lb - 1.0));
    }
  }
  const auto fine = rate_run(2048);
  const auto& coarse = rates_1024();
  const double rate = std::max(std::abs(coarse.fit.weighted_l2.rate / fine.fit.weighted_l2.rate - 1.0),
                               std::abs(coarse.fit.l1.rate / fine.fit.l1.rate - 1.0));
  return {eig <= kC11EigenTol && rate <= kC11RateTol,
          "eigenvalue change " + fmt("%.2e", eig) + ", rate change " + fmt("%.2e", rate) + " (N = 1024 vs 2048)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

Outcome criterion12(const fs::path& golden, const std::string& tool) {
  if (golden.empty() || tool.empty()) return {false, "golden directory or tool not given"};
  const fs::path work = fs::temp_directory_path() / ("pnp_acceptance_" + std::to_string(::getpid()));
  int cases = 0, files = 0;
  std::string mismatch;
  for (const auto& entry : fs::directory_iterator(golden)) {
    if (!entry.is_directory()) continue;
    const fs::path dir = entry.path();
    const fs::path out = work / dir.filename();
    fs::remove_all(out);
    const std::string cmd = "'" + tool + "' " + trim(slurp(dir / "args")) + " --config '" + (dir / "config.ini").string() +
                            "' --out '" + out.string() + "' > '" + (work / "stdout.txt").string() + "' 2>/dev/null";
    fs::create_directories(work);
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    ++cases;
    if (std::to_string(code) != trim(slurp(dir / "exit_code"))) mismatch += " " + dir.filename().string() + ":exit";
    if (slurp(work / "stdout.txt") != slurp(dir / "stdout.txt")) mismatch += " " + dir.filename().string() + ":stdout";
    const fs::path expected = dir / "expected";
    for (const auto& f : fs::recursive_directory_iterator(expected)) {
      if (!f.is_regular_file()) continue;
      const fs::path rel = fs::relative(f.path(), expected);
      ++files;
      if (slurp(f.path()) != slurp(out / rel)) mismatch += " " + dir.filename().string() + "/" + rel.string();
    }
  }
  fs::remove_all(work);
  return {cases > 0 && mismatch.empty(),
          std::to_string(cases) + " cases, " + std::to_string(files) + " files" + (mismatch.empty() ? ", byte-identical" : "; differ:" + mismatch)};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path golden;
  std::string tool;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--golden") golden = argv[i + 1];
    else if (key == "--tool") tool = argv[i + 1];
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"stationary consistency", criterion1},
      {"Gaussian limit", criterion2},
      {"radial eigenvalue 2 mu", criterion3},
      {"k=1 eigenvalue mu", criterion4},
      {"coercivity sampling", criterion5},
      {"operator structure", criterion6},
      {"dynamics structure", criterion7},
      {"rate reproduction", criterion8},
      {"L^p envelope", criterion9},
      {"intermediate asymptotics", criterion10},
      {"mesh robustness", criterion11},
      {"golden-file determinism", [&] { return criterion12(golden, tool); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
