#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "hbvm/problems.hpp"
#include "oracles.hpp"

using namespace hbvm;

namespace {

Eigen::VectorXd random_state(int dim, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd y(dim);
  for (int i = 0; i < dim; ++i) y(i) = u(rng);
  return y;
}

// Kepler needs |q| bounded away from zero.
Eigen::VectorXd sample_state(const ProblemSpec& p, std::mt19937_64& rng) {
  Eigen::VectorXd y = p.default_y0 + random_state(p.system.dim, rng, 0.2);
  return y;
}

}  // namespace

TEST_CASE("catalog contents") {
  std::set<std::string> names;
  for (const auto& p : catalog()) names.insert(p.name);
  for (const char* n : {"harmonic", "quartic", "sextic", "henon_heiles", "pendulum", "kepler"})
    CHECK(names.count(n) == 1);

  CHECK(*find_problem("harmonic").system.poly_degree == 2);
  CHECK(*find_problem("quartic").system.poly_degree == 4);
  CHECK(*find_problem("sextic").system.poly_degree == 6);
  CHECK(*find_problem("henon_heiles").system.poly_degree == 3);
  CHECK_FALSE(find_problem("pendulum").system.poly_degree.has_value());
  CHECK_FALSE(find_problem("kepler").system.poly_degree.has_value());
  CHECK_THROWS_AS(find_problem("lorenz"), std::invalid_argument);
}

TEST_CASE("J is skew and canonical") {
  for (const auto& p : catalog()) {
    const auto& j = p.system.J;
    CHECK(j == -j.transpose());
    CHECK(j == canonical_j(p.system.dim));
    CHECK(p.default_y0.size() == p.system.dim);
  }
  CHECK_THROWS_AS(canonical_j(3), std::invalid_argument);
}

TEST_CASE("gradients match central differences") {
  std::mt19937_64 rng(5);
  for (const auto& p : catalog()) {
    for (int n = 0; n < 20; ++n) {
      const Eigen::VectorXd y = sample_state(p, rng);
      const Eigen::VectorXd g = p.system.gradH(y);
      const Eigen::VectorXd fd = oracle::fd_gradient(p.system.H, y);
      CAPTURE(p.name);
      CHECK((g - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("Hessians match differenced gradients") {
  std::mt19937_64 rng(6);
  for (const auto& p : catalog()) {
    REQUIRE(p.system.hessH);
    const Eigen::VectorXd y = sample_state(p, rng);
    const Eigen::MatrixXd hess = p.system.hessH(y);
    for (int i = 0; i < p.system.dim; ++i) {
      Eigen::VectorXd yp = y, ym = y;
      yp(i) += 1e-6;
      ym(i) -= 1e-6;
      const Eigen::VectorXd col = (p.system.gradH(yp) - p.system.gradH(ym)) / 2e-6;
      CAPTURE(p.name);
      CHECK((hess.col(i) - col).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, col.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("skew quadratic form vanishes") {
  std::mt19937_64 rng(9);
  for (const auto& p : catalog())
    for (int n = 0; n < 100; ++n) {
      const Eigen::VectorXd g = p.system.gradH(sample_state(p, rng));
      CHECK(g.dot(p.system.J * g) == 0.0);
    }
}

TEST_CASE("polynomial degree from growth along rays") {
  std::mt19937_64 rng(13);
  for (const auto& p : catalog()) {
    if (!p.system.poly_degree) continue;
    for (int n = 0; n < 5; ++n) {
      const Eigen::VectorXd y = random_state(p.system.dim, rng, 1.0);
      const double a1 = 1e9, a2 = 1e10;
      const double growth = std::log(std::abs(p.system.H(a2 * y) / p.system.H(a1 * y))) / std::log(a2 / a1);
      CAPTURE(p.name);
      CHECK(std::abs(growth - *p.system.poly_degree) <= 1e-6);
    }
  }
}

TEST_CASE("reference solutions satisfy the ODE") {
  for (const auto& p : catalog()) {
    if (!p.reference_solution) continue;
    CHECK((p.reference_solution(0.0) - p.default_y0).cwiseAbs().maxCoeff() <= 1e-14);
    for (double t : {0.3, 1.1, 2.7, 4.0}) {
      const double dt = 1e-5;
      const Eigen::VectorXd deriv =
          (p.reference_solution(t + dt) - p.reference_solution(t - dt)) / (2.0 * dt);
      CAPTURE(p.name);
      CAPTURE(t);
      CHECK((deriv - p.system.f(p.reference_solution(t))).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("problem examples") {
  const auto& h = find_problem("harmonic");
  const Eigen::VectorXd quarter = h.reference_solution(M_PI / 2.0);
  CHECK(std::abs(quarter(0)) < 1e-15);
  CHECK(std::abs(quarter(1) + 1.0) < 1e-15);

  const auto& pend = find_problem("pendulum");
  CHECK(pend.system.gradH(Eigen::Vector2d::Zero()).isZero(0.0));

  const auto kep = kepler_problem(0.6);
  CHECK((kep.reference_solution(kep.period) - kep.default_y0).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(kep.system.H(kep.default_y0) + 0.5) < 1e-14);
  CHECK((find_problem("kepler").default_y0 - kep.default_y0).isZero(0.0));
}

TEST_CASE("solve_kepler_equation") {
  for (double e : {0.0, 0.3, 0.6, 0.9})
    for (double m : {0.0, 0.5, 2.0, 3.1, 5.9}) {
      const double big_e = solve_kepler_equation(m, e);
      CHECK(std::abs(big_e - e * std::sin(big_e) - m) <= 1e-13);
    }
}
