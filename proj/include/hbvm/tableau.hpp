#pragma once

#include <optional>

#include <Eigen/Dense>

#include "hbvm/legendre.hpp"

namespace hbvm {

/// Largest stage count and degree the builders accept.
inline constexpr int kMaxStages = 12;
inline constexpr int kMaxDegree = 6;

/// Legendre evaluation and integration matrices on a node set.
///   P_s(i,j)  = P_j(tau_i),          j = 1..s
///   P_s1(i,j) = P_j(tau_i),          j = 1..s+1
///   I_s(i,j)  = int_0^tau_i P_j
struct BasisMatrices {
  Eigen::MatrixXd P_s;
  Eigen::MatrixXd P_splus1;
  Eigen::MatrixXd I_s;
  Eigen::VectorXd omega;

  auto Omega() const { return omega.asDiagonal(); }
};

struct ButcherTableau {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  Eigen::Index stages() const { return c.size(); }
};

/// Raised when the node quadrature cannot support a degree-s method.
class WeakQuadratureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// HBVM(k,s): k stages, degree s, nodes from `family` (or `nodes` for Custom).
struct HbvmSpec {
  int k = 1;
  int s = 1;
  NodeFamily family = NodeFamily::Gauss;
  Eigen::VectorXd nodes;  // only used by NodeFamily::Custom
};

/// Node system for a spec; Custom nodes get interpolatory weights.
AbscissaeSystem abscissae(const HbvmSpec& spec);

/// Throws std::invalid_argument for malformed specs and WeakQuadratureError
/// when the quadrature is not exact to degree 2s-1. Custom node sets need k >= 2s.
void validate(const HbvmSpec& spec);

BasisMatrices basis_matrices(const AbscissaeSystem& sys, int s);

/// A = I_s P_s^T Omega, c = tau, b = omega.
ButcherTableau hbvm_tableau(const HbvmSpec& spec);
ButcherTableau hbvm_tableau(const AbscissaeSystem& sys, int s);

/// Collocation matrix alpha_ij = int_0^{tau_i} l_j.
Eigen::MatrixXd collocation_matrix(const Eigen::VectorXd& tau);

/// Collocation tableau filtered by the rank-s projector P_s P_s^T Omega.
ButcherTableau filtered_tableau(const AbscissaeSystem& sys, int s);

/// Number of singular values above `threshold`.
Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double threshold = 1e-10);

/// Tridiagonal Gauss spectral matrix: 1/2 in the corner, -xi_j above and
/// xi_j below the diagonal.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> xs_matrix(int s) {
  if (s < 1) throw std::invalid_argument("xs_matrix: s must be >= 1");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(s, s);
  x(0, 0) = Scalar(1) / Scalar(2);
  for (int j = 1; j < s; ++j) {
    x(j - 1, j) = -xi<Scalar>(j);
    x(j, j - 1) = xi<Scalar>(j);
  }
  return x;
}

/// X_s with the extra row (0, ..., 0, xi_s): I_s = P_{s+1} Xhat_s.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> xhat_matrix(int s) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(s + 1, s);
  x.topRows(s) = xs_matrix<Scalar>(s);
  x(s, s - 1) = xi<Scalar>(s);
  return x;
}

/// Xhat_s with an appended zero column: A P_{s+1} = P_{s+1} Xtilde_s.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> xtilde_matrix(int s) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(s + 1, s + 1);
  x.leftCols(s) = xhat_matrix<Scalar>(s);
  return x;
}

}  // namespace hbvm
