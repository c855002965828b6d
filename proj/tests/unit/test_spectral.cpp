#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "fixtures.hpp"
#include "pnp/numerics.hpp"
#include "pnp/spectral.hpp"

using namespace pnp;

namespace {

RadialField random_mode_f(const LinearizedOperator& op, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), w = 0.3 + std::abs(u(rng));
  const int k = op.mode();
  auto f = RadialField::sample(op.grid_ptr(), [&](double r) {
    return std::pow(r, k) * (a + b * std::cos(w * r) + c * r * r * std::exp(-r * r / 4));
  });
  return op.admissible(f);
}

}  // namespace

TEST_CASE("k = 0 operator rejects nonzero mean and maps zero to zero") {
  const auto& st = fixtures::harmonic_state(512);
  LinearizedOperator op(st, 0);
  CHECK_THROWS_AS(op.apply(RadialField::constant(st.grid_ptr(), 1.0)), std::invalid_argument);
  auto z = op.apply(RadialField::zeros(st.grid_ptr()));
  for (double v : z.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(LinearizedOperator(st, -1), std::invalid_argument);
}

TEST_CASE("self-adjointness and the dissipation identity on every mode") {
  const auto& st = fixtures::harmonic_state(1024);
  std::mt19937_64 rng(17);
  for (int k : {0, 1, 2, 3}) {
    LinearizedOperator op(st, k);
    for (int trial = 0; trial < 25; ++trial) {
      auto f1 = random_mode_f(op, rng), f2 = random_mode_f(op, rng);
      auto L1 = op.apply(f1), L2 = op.apply(f2);
      const double defect = std::abs(op.inner(f1, L2) - op.inner(L1, f2));
      CHECK(defect <= 1e-8 * std::sqrt(op.q1(f1) * op.q1(f2)));
      CHECK(-op.inner(f1, L1) == doctest::Approx(op.q2(f1)).epsilon(1e-8));
      CHECK(apply_linearized(op, f1)[7] == L1[7]);
    }
  }
}

TEST_CASE("solve inverts apply") {
  const auto& st = fixtures::harmonic_state(512);
  std::mt19937_64 rng(1);
  for (int k : {0, 1, 2}) {
    LinearizedOperator op(st, k);
    auto f = random_mode_f(op, rng);
    auto y = op.apply(f);
    for (double& v : y.values()) v = -v;
    auto g = op.solve(y);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      err = std::max(err, std::abs(g[i] - f[i]));
      scale = std::max(scale, std::abs(f[i]));
    }
    CHECK(err <= 1e-8 * scale);
  }
}

TEST_CASE("coercivity: Q2 >= mu Q1 on every mode, Q2 >= 2 mu Q1 on radial ones") {
  const auto& st = fixtures::harmonic_state(1024);
  std::mt19937_64 rng(23);
  for (int k : {0, 1, 2}) {
    LinearizedOperator op(st, k);
    const double bound = k == 0 ? 2.0 : 1.0;
    for (int trial = 0; trial < 50; ++trial) {
      auto f = random_mode_f(op, rng);
      CHECK(op.q2(f) >= bound * op.q1(f) - 1e-10 * op.q1(f));
    }
  }
}

TEST_CASE("radial eigenvalue 2 mu by shooting") {
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto& st = fixtures::harmonic_state(1024, mu);
    auto r = radial_eigen_shoot(st, mu, 0.5 * mu, 3.0 * mu);
    CHECK(r.lambda == doctest::Approx(2.0 * mu).epsilon(1e-3));
    CHECK(r.k == 0);
    CHECK(explicit_radial_residual(st, mu) <= 1e-6);
    CHECK(explicit_radial_profile_error(st, mu) <= 1e-6);
    auto scan = radial_shooting_scan(st, mu, 1e-3 * mu, 1.8 * mu, 100);
    for (std::size_t i = 1; i < scan.size(); ++i) CHECK((scan[i] > 0) == (scan[0] > 0));
  }
  const auto& st = fixtures::harmonic_state(1024);
  CHECK_THROWS_AS(radial_eigen_shoot(st, 1.0, 0.1, 1.5), ConvergenceError);
}

TEST_CASE("matrix route: k = 0 and k = 1 eigenvalues, k = 2 above k = 1") {
  const auto& st = fixtures::harmonic_state(2048);
  auto k0 = mode_eigen_matrix(LinearizedOperator(st, 0), 3);
  auto k1 = mode_eigen_matrix(LinearizedOperator(st, 1), 3);
  auto k2 = mode_eigen_matrix(LinearizedOperator(st, 2), 2);
  CHECK(k0[0].lambda == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(k1[0].lambda == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(k2[0].lambda > k1[0].lambda);
  CHECK(k1[0].lambda <= k0[0].lambda);
  auto shot = radial_eigen_shoot(st, 1.0, 0.5, 3.0);
  CHECK(std::abs(k0[0].lambda / shot.lambda - 1.0) <= 1e-3);
  for (const auto* set : {&k0, &k1, &k2}) {
    for (std::size_t j = 0; j < set->size(); ++j) {
      const auto& e = (*set)[j];
      LinearizedOperator op(st, e.k);
      CHECK(op.q2(e.f) / op.q1(e.f) == doctest::Approx(e.lambda).epsilon(1e-4));
      CHECK(e.residual <= 1e-9);
      if (j) CHECK(e.lambda >= (*set)[j - 1].lambda);
    }
  }
}

TEST_CASE("translation mode is the k = 1 eigenfunction") {
  const auto& st = fixtures::harmonic_state(2048);
  LinearizedOperator op(st, 1);
  CHECK(op.residual(translation_mode(st, 1.0), 1.0) <= 1e-5);
}

TEST_CASE("eigenvalues are stable under mesh doubling") {
  for (int k : {0, 1, 2}) {
    const double a = mode_eigen_matrix(LinearizedOperator(fixtures::harmonic_state(1024), k), 1)[0].lambda;
    const double b = mode_eigen_matrix(LinearizedOperator(fixtures::harmonic_state(2048), k), 1)[0].lambda;
    CHECK(std::abs(a / b - 1.0) <= 1e-3);
  }
}

TEST_CASE("spectral gap") {
  auto g1 = spectral_gap(fixtures::harmonic_state(2048, 1.0), 1.0);
  CHECK(g1.gap == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(g1.predicted_rate == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(g1.radial == doctest::Approx(2.0).epsilon(1e-3));
  auto g2 = spectral_gap(fixtures::harmonic_state(2048, 2.0), 2.0);
  CHECK(std::abs(g2.gap - 2.0) <= 2e-3);
  CHECK(g2.radial == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("eigen solver is deterministic and serializes") {
  const auto& st = fixtures::harmonic_state(512);
  auto a = mode_eigen_matrix(LinearizedOperator(st, 1), 2, 5);
  auto b = mode_eigen_matrix(LinearizedOperator(st, 1), 2, 5);
  CHECK(a[0].lambda == b[0].lambda);
  for (std::size_t i = 0; i < a[0].f.size(); ++i) CHECK(a[0].f[i] == b[0].f[i]);
  auto j = nlohmann::json::parse(to_json(a[0]));
  CHECK(j["k"] == 1);
  CHECK(j.contains("lambda"));
  CHECK(j.contains("residual"));
}
