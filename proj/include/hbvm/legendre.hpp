#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hbvm {

/// Node families understood by the tableau builders.
enum class NodeFamily { Gauss, Lobatto, Custom };

std::string to_string(NodeFamily family);
NodeFamily parse_family(const std::string& name);

/// Quadrature abscissae on [0,1] together with their weights.
///
/// Nodes are strictly increasing. Gauss and Custom nodes lie in (0,1];
/// Lobatto nodes include both endpoints.
struct AbscissaeSystem {
  Eigen::VectorXd tau;
  Eigen::VectorXd omega;
  NodeFamily family = NodeFamily::Custom;

  Eigen::Index size() const { return tau.size(); }
};

/// Raised when an iterative root or stage solve fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Values P_1(t), ..., P_n(t) of the orthonormal shifted-Legendre basis,
/// where P_j has degree j-1 and integrates against P_i to delta_ij on [0,1].
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> orthonormal_values(int n, Scalar t) {
  if (n < 1) throw std::invalid_argument("orthonormal_values: n must be >= 1");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(n);
  const Scalar x = Scalar(2) * t - Scalar(1);
  p(0) = Scalar(1);
  if (n > 1) p(1) = std::sqrt(Scalar(3)) * x;
  for (int j = 1; j + 2 <= n; ++j) {
    const Scalar a = Scalar(2 * j + 1) / Scalar(j + 1) *
                     std::sqrt(Scalar(2 * j + 3) / Scalar(2 * j + 1));
    const Scalar b =
        Scalar(j) / Scalar(j + 1) * std::sqrt(Scalar(2 * j + 3) / Scalar(2 * j - 1));
    p(j + 1) = x * a * p(j) - b * p(j - 1);
  }
  return p;
}

/// P_j(t) by the three-term recurrence.
template <typename Scalar>
Scalar eval_orthonormal(int j, Scalar t) {
  if (j < 1) throw std::invalid_argument("eval_orthonormal: index j must be >= 1");
  return orthonormal_values<Scalar>(j, t)(j - 1);
}

/// xi_j = 1 / (2 sqrt((2j+1)(2j-1))), the off-diagonal entries of X_s.
template <typename Scalar = double>
Scalar xi(int j) {
  if (j < 1) throw std::invalid_argument("xi: index j must be >= 1");
  return Scalar(1) / (Scalar(2) * std::sqrt(Scalar((2 * j + 1) * (2 * j - 1))));
}

/// Exact value of the integral of P_j over [0, c], from the closed form
///   int P_1 = P_1/2 + xi_1 P_2,   int P_j = -xi_{j-1} P_{j-1} + xi_j P_{j+1}.
template <typename Scalar>
Scalar integral_orthonormal(int j, Scalar c) {
  if (j < 1) throw std::invalid_argument("integral_orthonormal: index j must be >= 1");
  if (!(c >= Scalar(0) && c <= Scalar(1)))
    throw std::invalid_argument("integral_orthonormal: c must lie in [0,1]");
  const auto p = orthonormal_values<Scalar>(j + 1, c);
  if (j == 1) return p(0) / Scalar(2) + xi<Scalar>(1) * p(1);
  return -xi<Scalar>(j - 1) * p(j - 2) + xi<Scalar>(j) * p(j);
}

/// k-point Gauss-Legendre rule on [0,1] (exact to degree 2k-1).
AbscissaeSystem gauss_system(int k);

/// k-point Lobatto rule on [0,1], endpoints included (exact to degree 2k-3).
AbscissaeSystem lobatto_system(int k);

/// Node set with interpolatory weights. Nodes must be strictly increasing in (0,1].
AbscissaeSystem custom_system(const Eigen::VectorXd& tau);

/// omega_i = int_0^1 l_i(t) dt for the Lagrange basis on `tau`.
Eigen::VectorXd interpolatory_weights(const Eigen::VectorXd& tau);

/// Largest d with |sum omega_i tau_i^e - 1/(e+1)| <= tol for every e <= d,
/// scanned up to 2k+2. Returns -1 when even the weight sum is off.
int exactness_degree(const AbscissaeSystem& sys, double tol);

/// Throws std::invalid_argument unless nodes are pairwise distinct and in [0,1].
void require_distinct_nodes(const Eigen::VectorXd& tau);

}  // namespace hbvm
