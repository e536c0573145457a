#include "hbvm/problems.hpp"

#include <cmath>
#include <numbers>

namespace hbvm {

namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// H = p^2/2 + q^n/n for a single degree of freedom, y = (q, p).
ProblemSpec power_oscillator(std::string name, int power, std::string notes) {
  ProblemSpec p;
  p.name = std::move(name);
  p.notes = std::move(notes);
  p.system.dim = 2;
  p.system.J = canonical_j(2);
  p.system.poly_degree = power;
  p.system.H = [power](const VectorXd& y) {
    return 0.5 * y(1) * y(1) + std::pow(y(0), power) / power;
  };
  p.system.gradH = [power](const VectorXd& y) {
    return vec({std::pow(y(0), power - 1), y(1)});
  };
  p.system.hessH = [power](const VectorXd& y) {
    MatrixXd h = MatrixXd::Zero(2, 2);
    h(0, 0) = (power - 1) * std::pow(y(0), power - 2);
    h(1, 1) = 1.0;
    return h;
  };
  p.default_y0 = vec({1.0, 0.0});
  return p;
}

ProblemSpec harmonic() {
  auto p = power_oscillator("harmonic", 2, "H = (p^2 + q^2)/2; exact rotation in phase space");
  const VectorXd y0 = p.default_y0;
  p.reference_solution = [y0](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return vec({y0(0) * c + y0(1) * s, -y0(0) * s + y0(1) * c});
  };
  p.period = 2.0 * std::numbers::pi;
  return p;
}

ProblemSpec henon_heiles() {
  ProblemSpec p;
  p.name = "henon_heiles";
  p.notes = "H = (p1^2+p2^2)/2 + (q1^2+q2^2)/2 + q1^2 q2 - q2^3/3; y = (q1, q2, p1, p2)";
  p.system.dim = 4;
  p.system.J = canonical_j(4);
  p.system.poly_degree = 3;
  p.system.H = [](const VectorXd& y) {
    const double q1 = y(0), q2 = y(1), p1 = y(2), p2 = y(3);
    return 0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2 -
           q2 * q2 * q2 / 3.0;
  };
  p.system.gradH = [](const VectorXd& y) {
    const double q1 = y(0), q2 = y(1);
    return vec({q1 + 2.0 * q1 * q2, q2 + q1 * q1 - q2 * q2, y(2), y(3)});
  };
  p.system.hessH = [](const VectorXd& y) {
    const double q1 = y(0), q2 = y(1);
    MatrixXd h = MatrixXd::Identity(4, 4);
    h(0, 0) = 1.0 + 2.0 * q2;
    h(0, 1) = h(1, 0) = 2.0 * q1;
    h(1, 1) = 1.0 - 2.0 * q2;
    return h;
  };
  p.default_y0 = vec({0.3, -0.2, 0.2, 0.3});
  return p;
}

ProblemSpec pendulum() {
  ProblemSpec p;
  p.name = "pendulum";
  p.notes = "H = p^2/2 - cos q; non-polynomial";
  p.system.dim = 2;
  p.system.J = canonical_j(2);
  p.system.H = [](const VectorXd& y) { return 0.5 * y(1) * y(1) - std::cos(y(0)); };
  p.system.gradH = [](const VectorXd& y) { return vec({std::sin(y(0)), y(1)}); };
  p.system.hessH = [](const VectorXd& y) {
    MatrixXd h = MatrixXd::Zero(2, 2);
    h(0, 0) = std::cos(y(0));
    h(1, 1) = 1.0;
    return h;
  };
  p.default_y0 = vec({1.5, 0.0});
  return p;
}

}  // namespace

double solve_kepler_equation(double mean_anomaly, double eccentricity) {
  double e_anom = eccentricity < 0.8 ? mean_anomaly : std::numbers::pi;
  for (int it = 0; it < 100; ++it) {
    const double r = e_anom - eccentricity * std::sin(e_anom) - mean_anomaly;
    const double dr = 1.0 - eccentricity * std::cos(e_anom);
    const double step = r / dr;
    e_anom -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(e_anom))) return e_anom;
  }
  throw ConvergenceError("solve_kepler_equation: Newton iteration did not converge",
                         std::abs(e_anom - eccentricity * std::sin(e_anom) - mean_anomaly));
}

ProblemSpec kepler_problem(double eccentricity) {
  if (!(eccentricity >= 0.0 && eccentricity < 1.0))
    throw std::invalid_argument("kepler_problem: eccentricity must lie in [0,1)");
  ProblemSpec p;
  p.name = "kepler";
  p.notes = "H = |p|^2/2 - 1/|q|; y = (q1, q2, p1, p2); pericentre start, a = 1, period 2 pi";
  p.system.dim = 4;
  p.system.J = canonical_j(4);
  p.system.H = [](const VectorXd& y) {
    return 0.5 * y.tail<2>().squaredNorm() - 1.0 / y.head<2>().norm();
  };
  p.system.gradH = [](const VectorXd& y) {
    const Vector2d q = y.head<2>();
    const double r3 = std::pow(q.norm(), 3);
    return vec({q(0) / r3, q(1) / r3, y(2), y(3)});
  };
  p.system.hessH = [](const VectorXd& y) {
    const Vector2d q = y.head<2>();
    const double r = q.norm();
    MatrixXd h = MatrixXd::Identity(4, 4);
    h.topLeftCorner<2, 2>() =
        Eigen::Matrix2d::Identity() / std::pow(r, 3) - 3.0 * q * q.transpose() / std::pow(r, 5);
    return h;
  };
  const double e = eccentricity;
  p.default_y0 = vec({1.0 - e, 0.0, 0.0, std::sqrt((1.0 + e) / (1.0 - e))});
  p.reference_solution = [e](double t) {
    const double ea = solve_kepler_equation(t, e);
    const double c = std::cos(ea), s = std::sin(ea);
    const double root = std::sqrt(1.0 - e * e);
    const double denom = 1.0 - e * c;
    return vec({c - e, root * s, -s / denom, root * c / denom});
  };
  p.period = 2.0 * std::numbers::pi;
  return p;
}

const std::vector<ProblemSpec>& catalog() {
  static const std::vector<ProblemSpec> problems = [] {
    std::vector<ProblemSpec> list;
    list.push_back(harmonic());
    list.push_back(power_oscillator("quartic", 4, "H = p^2/2 + q^4/4"));
    list.push_back(power_oscillator("sextic", 6, "H = p^2/2 + q^6/6"));
    list.push_back(henon_heiles());
    list.push_back(pendulum());
    list.push_back(kepler_problem(0.6));
    return list;
  }();
  return problems;
}

const ProblemSpec& find_problem(const std::string& name) {
  for (const auto& p : catalog())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : catalog()) known += (known.empty() ? "" : ", ") + p.name;
  throw std::invalid_argument("unknown problem '" + name + "' (known: " + known + ")");
}

}  // namespace hbvm
