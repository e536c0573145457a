#include "hbvm/tableau.hpp"

#include <string>

namespace hbvm {

namespace {

constexpr double kExactnessTol = 1e-12;

}  // namespace

AbscissaeSystem abscissae(const HbvmSpec& spec) {
  switch (spec.family) {
    case NodeFamily::Gauss: return gauss_system(spec.k);
    case NodeFamily::Lobatto: return lobatto_system(spec.k);
    case NodeFamily::Custom: {
      if (spec.nodes.size() != spec.k)
        throw std::invalid_argument("custom spec: expected " + std::to_string(spec.k) +
                                    " nodes, got " + std::to_string(spec.nodes.size()));
      return custom_system(spec.nodes);
    }
  }
  throw std::invalid_argument("unknown node family");
}

void validate(const HbvmSpec& spec) {
  if (spec.s < 1) throw std::invalid_argument("degree s must be >= 1");
  if (spec.k < spec.s) throw std::invalid_argument("stage count k must be >= s");
  if (spec.k > kMaxStages)
    throw std::invalid_argument("k > " + std::to_string(kMaxStages) + " is not supported");
  if (spec.s > kMaxDegree)
    throw std::invalid_argument("s > " + std::to_string(kMaxDegree) + " is not supported");
  if (spec.family == NodeFamily::Lobatto && spec.k < 2)
    throw std::invalid_argument("Lobatto nodes need k >= 2");

  const int needed = 2 * spec.s - 1;
  if (spec.family == NodeFamily::Custom && spec.k - 1 < needed)
    throw WeakQuadratureError("quadrature too weak for B(2s): custom nodes give degree k-1 = " +
                              std::to_string(spec.k - 1) + " < 2s-1 = " + std::to_string(needed));
  const int degree = exactness_degree(abscissae(spec), kExactnessTol);
  if (degree < needed)
    throw WeakQuadratureError("quadrature too weak for B(2s): exactness degree " +
                              std::to_string(degree) + " < 2s-1 = " + std::to_string(needed));
}

BasisMatrices basis_matrices(const AbscissaeSystem& sys, int s) {
  const Eigen::Index k = sys.size();
  if (s < 1 || s > k) throw std::invalid_argument("basis_matrices: need 1 <= s <= k");
  BasisMatrices m;
  m.P_splus1.resize(k, s + 1);
  m.I_s.resize(k, s);
  for (Eigen::Index i = 0; i < k; ++i) {
    m.P_splus1.row(i) = orthonormal_values<double>(s + 1, sys.tau(i)).transpose();
    for (int j = 1; j <= s; ++j) m.I_s(i, j - 1) = integral_orthonormal<double>(j, sys.tau(i));
  }
  m.P_s = m.P_splus1.leftCols(s);
  m.omega = sys.omega;
  return m;
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double threshold) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return (svd.singularValues().array() > threshold).count();
}

ButcherTableau hbvm_tableau(const AbscissaeSystem& sys, int s) {
  const auto basis = basis_matrices(sys, s);
  ButcherTableau tab{sys.tau, basis.I_s * basis.P_s.transpose() * basis.Omega(), sys.omega};
  if (numerical_rank(tab.A) != s)
    throw std::logic_error("hbvm_tableau: Butcher matrix does not have rank s");
  return tab;
}

ButcherTableau hbvm_tableau(const HbvmSpec& spec) {
  validate(spec);
  return hbvm_tableau(abscissae(spec), spec.s);
}

Eigen::MatrixXd collocation_matrix(const Eigen::VectorXd& tau) {
  require_distinct_nodes(tau);
  // With V(i,m) = P_m(tau_i) and I(i,m) = int_0^tau_i P_m, the Lagrange basis
  // is l_j = sum_m (V^{-1})(m,j) P_m, hence alpha = I V^{-1}.
  const Eigen::Index k = tau.size();
  const int n = static_cast<int>(k);
  Eigen::MatrixXd v(k, k), integrals(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    v.row(i) = orthonormal_values<double>(n, tau(i)).transpose();
    for (int m = 1; m <= n; ++m) integrals(i, m - 1) = integral_orthonormal<double>(m, tau(i));
  }
  const auto lu = v.transpose().fullPivLu();
  Eigen::MatrixXd alpha_t = lu.solve(integrals.transpose());
  alpha_t += lu.solve(integrals.transpose() - v.transpose() * alpha_t);
  return alpha_t.transpose();
}

ButcherTableau filtered_tableau(const AbscissaeSystem& sys, int s) {
  if (exactness_degree(sys, kExactnessTol) < 2 * s - 1)
    throw WeakQuadratureError("quadrature too weak for B(2s)");
  const auto basis = basis_matrices(sys, s);
  return {sys.tau,
          collocation_matrix(sys.tau) * basis.P_s * basis.P_s.transpose() * basis.Omega(),
          sys.omega};
}

}  // namespace hbvm
