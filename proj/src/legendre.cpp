#include "hbvm/legendre.hpp"

#include <algorithm>
#include <numbers>

namespace hbvm {

namespace {

constexpr double kRootTol = 1e-15;
constexpr int kRootMaxIter = 100;

struct LegendrePair {
  double value;       // L_n(x)
  double previous;    // L_{n-1}(x)
  double derivative;  // L_n'(x)
};

// Classical Legendre polynomial on [-1,1] with its derivative.
LegendrePair legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0, 0.0};
  for (int j = 1; j < n; ++j) {
    const double p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
    p0 = p1;
    p1 = p2;
  }
  double dp;
  if (std::abs(1.0 - x * x) > 1e-300) {
    dp = n * (p0 - x * p1) / (1.0 - x * x);
  } else {
    // L_n'(+-1) = (+-1)^(n-1) n(n+1)/2
    dp = (x > 0 || n % 2 == 1 ? 1.0 : -1.0) * n * (n + 1) / 2.0;
  }
  return {p1, p0, dp};
}

double newton_root(auto&& residual_and_slope, double x, const char* what) {
  for (int it = 0; it < kRootMaxIter; ++it) {
    const auto [r, dr] = residual_and_slope(x);
    const double dx = r / dr;
    x -= dx;
    if (std::abs(dx) <= kRootTol || std::abs(r) <= kRootTol) return x;
  }
  const auto [r, dr] = residual_and_slope(x);
  (void)dr;
  throw ConvergenceError(std::string(what) + ": Newton iteration for nodes did not converge",
                         std::abs(r));
}

}  // namespace

std::string to_string(NodeFamily family) {
  switch (family) {
    case NodeFamily::Gauss: return "gauss";
    case NodeFamily::Lobatto: return "lobatto";
    case NodeFamily::Custom: return "custom";
  }
  return "custom";
}

NodeFamily parse_family(const std::string& name) {
  if (name == "gauss") return NodeFamily::Gauss;
  if (name == "lobatto") return NodeFamily::Lobatto;
  if (name == "custom") return NodeFamily::Custom;
  throw std::invalid_argument("unknown node family '" + name + "'");
}

AbscissaeSystem gauss_system(int k) {
  if (k < 1) throw std::invalid_argument("gauss_system: k must be >= 1");
  AbscissaeSystem sys;
  sys.family = NodeFamily::Gauss;
  sys.tau.resize(k);
  sys.omega.resize(k);

  // Roots come in pairs x, -x on [-1,1]; only the non-negative half is solved.
  for (int i = 0; i < (k + 1) / 2; ++i) {
    const double guess =
        std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double x = 0.0;
    if (!(k % 2 == 1 && i == k / 2)) {
      x = newton_root(
          [k](double z) {
            const auto l = legendre(k, z);
            return std::pair{l.value, l.derivative};
          },
          guess, "gauss_system");
    }
    const auto l = legendre(k, x);
    // w = 2 / (k L_{k-1} L_k') on [-1,1]; halved for [0,1].
    const double w = 1.0 / (k * l.previous * l.derivative);
    sys.tau(k - 1 - i) = 0.5 + 0.5 * x;
    sys.tau(i) = 0.5 - 0.5 * x;
    sys.omega(i) = w;
    sys.omega(k - 1 - i) = w;
  }
  return sys;
}

AbscissaeSystem lobatto_system(int k) {
  if (k < 2) throw std::invalid_argument("lobatto_system: k must be >= 2");
  const int n = k - 1;
  AbscissaeSystem sys;
  sys.family = NodeFamily::Lobatto;
  sys.tau.resize(k);
  sys.omega.resize(k);

  // Interior nodes are the roots of L_n'; endpoints complete the rule.
  for (int i = 0; i < k / 2; ++i) {
    double x = 1.0;
    if (i > 0) {
      const double guess = std::cos(std::numbers::pi * i / n);
      x = newton_root(
          [n](double z) {
            const auto l = legendre(n, z);
            const double d2 = (2.0 * z * l.derivative - n * (n + 1.0) * l.value) / (1.0 - z * z);
            return std::pair{l.derivative, d2};
          },
          guess, "lobatto_system");
    }
    const double ln = legendre(n, x).value;
    const double w = 1.0 / (n * (n + 1.0) * ln * ln);
    sys.tau(k - 1 - i) = 0.5 + 0.5 * x;
    sys.tau(i) = 0.5 - 0.5 * x;
    sys.omega(i) = w;
    sys.omega(k - 1 - i) = w;
  }
  if (k % 2 == 1) {
    const double ln = legendre(n, 0.0).value;
    sys.tau(k / 2) = 0.5;
    sys.omega(k / 2) = 1.0 / (n * (n + 1.0) * ln * ln);
  }
  sys.tau(0) = 0.0;
  sys.tau(k - 1) = 1.0;
  return sys;
}

void require_distinct_nodes(const Eigen::VectorXd& tau) {
  if (tau.size() < 1) throw std::invalid_argument("node list is empty");
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    if (!(tau(i) >= 0.0 && tau(i) <= 1.0))
      throw std::invalid_argument("node " + std::to_string(tau(i)) + " lies outside [0,1]");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(tau(i) - tau(j)) <= 64 * std::numeric_limits<double>::epsilon())
        throw std::invalid_argument("duplicate node " + std::to_string(tau(i)));
  }
}

Eigen::VectorXd interpolatory_weights(const Eigen::VectorXd& tau) {
  require_distinct_nodes(tau);
  // Moment conditions sum_i w_i P_j(tau_i) = delta_j1 in the orthonormal basis.
  const Eigen::Index k = tau.size();
  Eigen::MatrixXd v(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    v.col(i) = orthonormal_values<double>(static_cast<int>(k), tau(i));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(0) = 1.0;
  const auto lu = v.fullPivLu();
  Eigen::VectorXd w = lu.solve(rhs);
  w += lu.solve(rhs - v * w);
  return w;
}

AbscissaeSystem custom_system(const Eigen::VectorXd& tau) {
  require_distinct_nodes(tau);
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    if (tau(i) <= 0.0) throw std::invalid_argument("custom nodes must lie in (0,1]");
    if (i > 0 && tau(i) <= tau(i - 1))
      throw std::invalid_argument("custom nodes must be strictly increasing");
  }
  return {tau, interpolatory_weights(tau), NodeFamily::Custom};
}

int exactness_degree(const AbscissaeSystem& sys, double tol) {
  const int cap = 2 * static_cast<int>(sys.size()) + 2;
  Eigen::VectorXd powers = Eigen::VectorXd::Ones(sys.size());
  int degree = -1;
  for (int e = 0; e <= cap; ++e) {
    const double moment = sys.omega.dot(powers);
    if (std::abs(moment - 1.0 / (e + 1)) > tol) break;
    degree = e;
    powers = powers.cwiseProduct(sys.tau);
  }
  return degree;
}

}  // namespace hbvm
