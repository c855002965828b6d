#include "pnp/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "pnp/diagnostics.hpp"
#include "pnp/numerics.hpp"
#include "pnp/poisson.hpp"

namespace pnp {

LinearizedOperator::LinearizedOperator(StationaryState base, int k)
    : base_(std::move(base)), k_(k) {
  if (k_ < 0) throw std::invalid_argument("LinearizedOperator: mode must be >= 0");
  const RadialGrid& g = base_.grid();
  const int d = g.dimension();
  kappa_ = static_cast<double>(k_) * (k_ + d - 2);
  const int p = k_ + d - 2;
  outer_robin_ = g.sphere_area() * std::pow(g.r_max(), d - 2) * p;
  weight_.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) weight_[i] = g.volume(i) * base_.n_inf[i];
  mobility_ = face_mobility(base_.n_inf);
}

RadialField LinearizedOperator::multiply_weight(const RadialField& f) const {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = weight_[i] * f[i];
  return RadialField(f.grid_ptr(), std::move(out));
}

void LinearizedOperator::check_mean(const RadialField& f) const {
  if (k_ != 0) return;
  double mean = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    mean += weight_[i] * f[i];
    scale += weight_[i] * std::abs(f[i]);
  }
  if (std::abs(mean) > 1e-9 * scale)
    throw std::invalid_argument("linearized operator: radial perturbation must have zero mean");
}

RadialField LinearizedOperator::admissible(const RadialField& f) const {
  RadialField out = f;
  if (k_ == 0) {
    double mean = 0.0, total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      mean += weight_[i] * f[i];
      total += weight_[i];
    }
    for (double& v : out.values()) v -= mean / total;
  } else {
    out[0] = 0.0;
  }
  return out;
}

RadialField LinearizedOperator::potential(const RadialField& f) const {
  if (f.grid_ptr() != grid_ptr()) throw std::invalid_argument("linearized operator: grid mismatch");
  if (k_ == 0) {
    std::vector<double> src(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) src[i] = base_.n_inf[i] * f[i];
    return green_solve(RadialField(grid_ptr(), std::move(src)));
  }
  const RadialGrid& g = base_.grid();
  const std::size_t N = g.size() - 1;
  std::vector<double> lo(N, 0.0), di(N, 0.0), up(N, 0.0), rhs(N);
  for (std::size_t i = 1; i <= N; ++i) {
    const std::size_t r = i - 1;
    const double r2 = g.node(i) * g.node(i);
    di[r] = g.transmissibility(i - 1) + g.volume(i) * kappa_ / r2;
    if (i > 1) lo[r] = -g.transmissibility(i - 1);
    if (i < N) {
      di[r] += g.transmissibility(i);
      up[r] = -g.transmissibility(i);
    } else {
      di[r] += outer_robin_;
    }
    rhs[r] = weight_[i] * f[i];
  }
  const auto sol = solve_tridiagonal(lo, di, up, rhs);
  std::vector<double> gc(g.size(), 0.0);
  std::copy(sol.begin(), sol.end(), gc.begin() + 1);
  return RadialField(grid_ptr(), std::move(gc), Parity::odd);
}

namespace {

// (K w)_i for the mode: face-mobility Laplacian plus the angular term.
std::vector<double> stiffness(const RadialGrid& g, const std::vector<double>& D,
                              const std::vector<double>& W, double kappa, int k,
                              const RadialField& w) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double flux = D[i] * (w[i + 1] - w[i]);
    out[i] -= flux;
    out[i + 1] += flux;
  }
  if (k > 0) {
    out[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) out[i] += W[i] * kappa * w[i] / (g.node(i) * g.node(i));
  }
  return out;
}

}  // namespace

RadialField LinearizedOperator::apply(const RadialField& f) const {
  if (f.grid_ptr() != grid_ptr()) throw std::invalid_argument("linearized operator: grid mismatch");
  check_mean(f);
  const RadialField gc = potential(f);
  RadialField w = f;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += gc[i];
  if (k_ > 0) w[0] = 0.0;
  const auto Kw = stiffness(base_.grid(), mobility_, weight_, kappa_, k_, w);
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = (k_ > 0 ? 1 : 0); i < f.size(); ++i) out[i] = -Kw[i] / weight_[i];
  return RadialField(grid_ptr(), std::move(out), f.parity());
}

RadialField LinearizedOperator::solve(const RadialField& y) const {
  const RadialGrid& g = base_.grid();
  const std::size_t n = g.size();
  const std::size_t N = n - 1;
  const auto& D = mobility_;
  const auto& W = weight_;

  // K w = W y on nodes 1..N with w_0 = 0 (Dirichlet for k > 0, a pin for k = 0)
  std::vector<double> lo(N, 0.0), di(N, 0.0), up(N, 0.0), rhs(N);
  for (std::size_t i = 1; i <= N; ++i) {
    const std::size_t r = i - 1;
    di[r] = D[i - 1];
    if (i > 1) lo[r] = -D[i - 1];
    if (i < N) {
      di[r] += D[i];
      up[r] = -D[i];
    }
    if (k_ > 0) di[r] += W[i] * kappa_ / (g.node(i) * g.node(i));
    rhs[r] = W[i] * y[i];
  }
  std::vector<double> w(n, 0.0);
  {
    const auto sol = solve_tridiagonal(lo, di, up, rhs);
    std::copy(sol.begin(), sol.end(), w.begin() + 1);
  }

  std::vector<double> f(n, 0.0);
  if (k_ > 0) {
    // (P + W) g = W w, f = w - g
    for (std::size_t i = 1; i <= N; ++i) {
      const std::size_t r = i - 1;
      di[r] = g.transmissibility(i - 1) + g.volume(i) * kappa_ / (g.node(i) * g.node(i)) + W[i];
      lo[r] = i > 1 ? -g.transmissibility(i - 1) : 0.0;
      if (i < N) {
        di[r] += g.transmissibility(i);
        up[r] = -g.transmissibility(i);
      } else {
        di[r] += outer_robin_;
        up[r] = 0.0;
      }
      rhs[r] = W[i] * w[i];
    }
    const auto gsol = solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t i = 1; i <= N; ++i) f[i] = w[i] - gsol[i - 1];
    return RadialField(grid_ptr(), std::move(f), Parity::odd);
  }

  // k = 0: (L0 + W) g = W (w + alpha) on nodes 0..N-1 with g_N = 0, alpha
  // fixed by the zero-mean condition on f = w + alpha - g.
  std::vector<double> l0(N, 0.0), d0(N, 0.0), u0(N, 0.0), rw(N), r1(N);
  for (std::size_t i = 0; i < N; ++i) {
    d0[i] = g.transmissibility(i) + W[i];
    if (i + 1 < N) u0[i] = -g.transmissibility(i);
    if (i > 0) {
      d0[i] += g.transmissibility(i - 1);
      l0[i] = -g.transmissibility(i - 1);
    }
    rw[i] = W[i] * w[i];
    r1[i] = W[i];
  }
  const auto gw = solve_tridiagonal(l0, d0, u0, rw);
  const auto g1 = solve_tridiagonal(l0, d0, u0, r1);
  double num = W[N] * w[N], den = W[N];
  for (std::size_t i = 0; i < N; ++i) {
    num += W[i] * (w[i] - gw[i]);
    den += W[i] * (1.0 - g1[i]);
  }
  const double alpha = -num / den;
  for (std::size_t i = 0; i < N; ++i) f[i] = w[i] + alpha - (gw[i] + alpha * g1[i]);
  f[N] = w[N] + alpha;
  return RadialField(grid_ptr(), std::move(f), Parity::even);
}

double LinearizedOperator::inner(const RadialField& a, const RadialField& b) const {
  const RadialField gb = potential(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += weight_[i] * a[i] * (b[i] + gb[i]);
  return s;
}

double LinearizedOperator::q2(const RadialField& f) const {
  const RadialField gc = potential(f);
  RadialField w = f;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += gc[i];
  if (k_ > 0) w[0] = 0.0;
  const RadialGrid& g = base_.grid();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const double dw = w[i + 1] - w[i];
    s += mobility_[i] * dw * dw;
  }
  if (k_ > 0)
    for (std::size_t i = 1; i < w.size(); ++i) s += weight_[i] * kappa_ * w[i] * w[i] / (g.node(i) * g.node(i));
  return s;
}

double LinearizedOperator::residual(const RadialField& f, double lambda) const {
  RadialField r = apply(f);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -r[i] - lambda * f[i];
  return std::sqrt(std::max(0.0, q1(r)) / q1(f));
}

RadialField apply_linearized(const LinearizedOperator& op, const RadialField& f) { return op.apply(f); }

// --- matrix route ------------------------------------------------------------

std::vector<SpectralResult> mode_eigen_matrix(const LinearizedOperator& op, int n_eigs,
                                              std::uint64_t seed, double tol) {
  if (n_eigs < 1) throw std::invalid_argument("mode_eigen_matrix: n_eigs must be >= 1");
  const GridPtr& grid = op.grid_ptr();
  const std::size_t n = grid->size();
  const int block = std::min<int>(n_eigs + 4, static_cast<int>(n) - 2);
  if (block < n_eigs) throw std::invalid_argument("mode_eigen_matrix: grid too small");

  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; };

  std::vector<RadialField> X;
  for (int j = 0; j < block; ++j) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform();
    X.push_back(op.admissible(RadialField(grid, std::move(v))));
  }

  std::vector<double> theta(block, 0.0), res(block, 1.0);
  Eigen::MatrixXd C;
  std::vector<RadialField> Y;
  for (int iter = 0; iter < 1000; ++iter) {
    Y.clear();
    for (const auto& x : X) Y.push_back(op.admissible(op.solve(x)));
    std::vector<RadialField> GX, GY;
    for (int j = 0; j < block; ++j) {
      GX.push_back(op.potential(X[j]));
      GY.push_back(op.potential(Y[j]));
    }
    const RadialField& nst = op.base().n_inf;
    auto q1dot = [&](const RadialField& a, const RadialField& b, const RadialField& gb) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += grid->volume(i) * nst[i] * a[i] * (b[i] + gb[i]);
      return s;
    };
    Eigen::MatrixXd H(block, block), B(block, block);
    for (int i = 0; i < block; ++i)
      for (int j = 0; j < block; ++j) {
        H(i, j) = q1dot(Y[i], X[j], GX[j]);
        B(i, j) = q1dot(Y[i], Y[j], GY[j]);
      }
    H = 0.5 * (H + H.transpose()).eval();
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, B);
    if (es.info() != Eigen::Success) throw ConvergenceError("mode_eigen_matrix: Rayleigh-Ritz failed", 0.0, iter);
    C = es.eigenvectors();

    std::vector<RadialField> Xn;
    double worst = 0.0;
    for (int j = 0; j < block; ++j) {
      std::vector<double> y(n, 0.0), ax(n, 0.0);
      for (int k = 0; k < block; ++k)
        for (std::size_t i = 0; i < n; ++i) {
          y[i] += C(k, j) * Y[k][i];
          ax[i] += C(k, j) * X[k][i];
        }
      theta[j] = es.eigenvalues()(j);
      RadialField yf(grid, y);
      const double norm = std::sqrt(op.q1(yf));
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) r[i] = ax[i] - theta[j] * y[i];
      res[j] = std::sqrt(std::max(0.0, op.q1(RadialField(grid, std::move(r))))) / norm;
      if (j < n_eigs) worst = std::max(worst, res[j]);
      for (double& v : yf.values()) v /= norm;
      Xn.push_back(std::move(yf));
    }
    X = std::move(Xn);
    if (worst < tol) {
      std::vector<SpectralResult> out;
      for (int j = 0; j < n_eigs; ++j) {
        RadialField f = X[j];
        // sign convention: the largest weighted entry is positive
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = std::abs(f[i]) * std::sqrt(grid->volume(i) * nst[i]);
          if (v > best) {
            best = v;
            arg = i;
          }
        }
        if (f[arg] < 0) for (double& v : f.values()) v = -v;
        const double r = op.residual(f, theta[j]);
        RadialField gc = op.potential(f);
        out.emplace_back(op.mode(), theta[j], std::move(f), std::move(gc), r, "matrix");
      }
      return out;
    }
  }
  throw ConvergenceError("mode_eigen_matrix: subspace iteration did not converge", res[0], 1000);
}

// --- radial shooting ----------------------------------------------------------

namespace {

using State4 = std::array<double, 4>;
namespace odeint = boost::numeric::odeint;

}  // namespace

void RadialShooter::solve(double lambda, const std::vector<double>& s, std::vector<double>& phi,
                          std::vector<double>& dphi) const {
  const double bP = 0.25 * a * a - 0.25 * mu * a;
  const double b = -(2.0 * mu + lambda - 4.0 * a) / 8.0;
  const double s0 = 1e-6 / mu;
  auto series = [&](double t) {
    return State4{a * t + bP * t * t, a + 2.0 * bP * t, t + b * t * t, 1.0 + 2.0 * b * t};
  };
  const double m = mu, lam = lambda;
  auto rhs = [m, lam](const State4& y, State4& dy, double t) {
    dy[0] = y[1];
    dy[1] = y[1] * (y[0] / (2.0 * t) - 0.5 * m);
    dy[2] = y[3];
    dy[3] = -((m * t - y[0]) / (2.0 * t)) * y[3] - ((lam - 2.0 * y[1]) / (4.0 * t)) * y[2];
  };
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_fehlberg78<State4>());
  State4 x = series(s0);
  double t = s0, dt = s0;
  phi.assign(s.size(), 0.0);
  dphi.assign(s.size(), 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] <= s0) {
      const State4 y = series(s[k]);
      phi[k] = y[2];
      dphi[k] = y[3];
      continue;
    }
    while (t < s[k]) {
      double h = std::min(dt, s[k] - t);
      const bool truncated = h < dt;
      if (stepper.try_step(rhs, x, t, h) == odeint::success) {
        if (!truncated) dt = h;
      } else {
        dt = h;
        if (!(dt > 1e-300)) throw ConvergenceError("radial shooting: step size underflow", 0.0, 0);
      }
    }
    phi[k] = x[2];
    dphi[k] = x[3];
  }
}

double RadialShooter::functional(double lambda) const {
  std::vector<double> phi, dphi;
  solve(lambda, {s_max}, phi, dphi);
  return phi[0] * std::pow(s_max, lambda / (2.0 * mu));
}

RadialShooter make_radial_shooter(const StationaryState& st, double mu) {
  if (st.dimension() != 2 || !st.potential.is_harmonic())
    throw std::invalid_argument("radial shooting needs a harmonic d = 2 state");
  const ShootingSolution sol = solve_shooting(mu, st.mass, st.grid_ptr());
  return RadialShooter{mu, sol.a, default_s_max(mu)};
}

std::vector<double> radial_shooting_scan(const StationaryState& st, double mu, double lo, double hi,
                                         int count) {
  if (!(hi > lo) || count < 2) throw std::invalid_argument("radial_shooting_scan: bad range");
  const RadialShooter sh = make_radial_shooter(st, mu);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = sh.functional(lo + (hi - lo) * i / (count - 1));
  return out;
}

SpectralResult radial_eigen_shoot(const StationaryState& st, double mu, double lo, double hi,
                                  double tol) {
  if (!(hi > lo) || !(lo >= 0.0)) throw std::invalid_argument("radial_eigen_shoot: bad range");
  const RadialShooter sh = make_radial_shooter(st, mu);
  constexpr int scan = 200;
  double x0 = lo, f0 = sh.functional(lo);
  double a = 0, b = 0, fa = 0, fb = 0;
  bool found = false;
  for (int i = 1; i <= scan && !found; ++i) {
    const double x1 = lo + (hi - lo) * i / scan;
    const double f1 = sh.functional(x1);
    if (f0 == 0.0 || (f0 < 0) != (f1 < 0)) {
      a = x0, b = x1, fa = f0, fb = f1;
      found = true;
    }
    x0 = x1;
    f0 = f1;
  }
  if (!found) throw ConvergenceError("radial_eigen_shoot: no sign change in range", std::abs(f0), scan);
  double lambda = a;
  if (fa != 0.0) {
    std::uintmax_t it = 200;
    auto fn = [&](double l) { return sh.functional(l); };
    const int bits = std::clamp(static_cast<int>(-std::log2(tol)), 10, 52);
    auto [l0, l1] = boost::math::tools::toms748_solve(fn, a, b, fa, fb,
                                                      boost::math::tools::eps_tolerance<double>(bits), it);
    lambda = 0.5 * (l0 + l1);
  }

  const RadialGrid& g = st.grid();
  std::vector<double> s(g.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = g.node(i) * g.node(i);
  std::vector<double> phi, dphi;
  sh.solve(lambda, s, phi, dphi);
  const ShootingSolution base = solve_shooting(mu, st.mass, st.grid_ptr());
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) f[i] = dphi[i] / base.dPhi[i];
  RadialField ff(st.grid_ptr(), std::move(f));
  LinearizedOperator op(st, 0);
  ff = op.admissible(ff);
  double peak = 0.0;
  for (double v : phi) peak = std::max(peak, std::abs(v));
  std::vector<double> tail;
  sh.solve(lambda, {sh.s_max}, tail, dphi);
  const double residual = std::abs(tail[0]) / peak;
  RadialField gc = op.potential(ff);
  return SpectralResult(0, lambda, std::move(ff), std::move(gc), residual, "shoot");
}

double explicit_radial_residual(const StationaryState& st, double mu) {
  const ShootingSolution sol = solve_shooting(mu, st.mass, st.grid_ptr());
  const double lambda = 2.0 * mu;
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 1; i < sol.s.size(); ++i) {
    const double s = sol.s[i], P = sol.Phi[i], P1 = sol.dPhi[i];
    const double P2 = shooting_second_derivative(mu, s, P, P1);
    const double P3 = P2 * (P / (2.0 * s) - 0.5 * mu) + P1 * (P1 / (2.0 * s) - P / (2.0 * s * s));
    const double phi = s * P1, d1 = P1 + s * P2, d2 = 2.0 * P2 + s * P3;
    const double lhs = d2 + ((mu * s - P) / (2.0 * s)) * d1 + ((lambda - 2.0 * P1) / (4.0 * s)) * phi;
    worst = std::max(worst, std::abs(lhs));
    scale = std::max(scale, std::abs(d2));
  }
  return worst / std::max(scale, 1e-300);
}

double explicit_radial_profile_error(const StationaryState& st, double mu) {
  const RadialShooter sh = make_radial_shooter(st, mu);
  const ShootingSolution sol = solve_shooting(mu, st.mass, st.grid_ptr());
  std::vector<double> phi, dphi;
  sh.solve(2.0 * mu, sol.s, phi, dphi);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < sol.s.size(); ++i) {
    const double exact = sol.s[i] * sol.dPhi[i] / sh.a;
    worst = std::max(worst, std::abs(phi[i] - exact));
    scale = std::max(scale, std::abs(exact));
  }
  return worst / scale;
}

RadialField translation_mode(const StationaryState& st, double mu) {
  const RadialGrid& g = st.grid();
  const auto m = node_enclosed_mass(st.n_inf);
  const double omega = g.sphere_area();
  std::vector<double> f(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double r = g.node(i);
    f[i] = mu * r - m[i] / (omega * std::pow(r, g.dimension() - 1));
  }
  return RadialField(st.grid_ptr(), std::move(f), Parity::odd);
}

GapReport spectral_gap(const StationaryState& st, double mu) {
  if (!st.potential.is_harmonic()) throw std::invalid_argument("spectral_gap: harmonic potential required");
  (void)mu;
  GapReport rep;
  rep.radial = mode_eigen_matrix(LinearizedOperator(st, 0), 1).front().lambda;
  rep.translation = mode_eigen_matrix(LinearizedOperator(st, 1), 1).front().lambda;
  rep.gap = std::min(rep.radial, rep.translation);
  rep.predicted_rate = 2.0 * rep.gap;
  return rep;
}

std::string to_json(const SpectralResult& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["lambda"] = r.lambda;
  j["residual"] = r.residual;
  j["method"] = r.method;
  return j.dump(2);
}

}  // namespace pnp
