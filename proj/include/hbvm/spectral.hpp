#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hbvm/tableau.hpp"

namespace hbvm {

using Complex = std::complex<double>;
using ComplexList = std::vector<Complex>;

/// All eigenvalues of a small dense real matrix, with algebraic multiplicity.
/// The matrix is balanced, reduced to Hessenberg form and driven to real Schur
/// form by shifted QR. Throws ConvergenceError after 30n sweeps.
ComplexList eigenvalues(const Eigen::MatrixXd& m);

/// Diagonal similarity by powers of two that equalises row and column norms.
Eigen::MatrixXd balance(const Eigen::MatrixXd& m);

/// Eigenvalues of A split into a zero cluster and the part compared against
/// the spectrum of X_s.
struct SpectrumReport {
  ComplexList eigenvalues;
  int zero_count = 0;
  ComplexList nonzero;
  ComplexList reference;
  double zero_threshold = 0.0;
  double max_match_distance = 0.0;
  bool passed = false;
};

/// Pairs each nonzero eigenvalue with a reference eigenvalue (greedy nearest
/// after sorting by real then imaginary part) and returns the largest distance.
double match_distance(ComplexList values, ComplexList reference);

/// Zero threshold is 1e-8 * max(1, ||A||_inf); `tol` bounds the match distance.
SpectrumReport isospectral_check(const Eigen::MatrixXd& A, int s, double tol);
SpectrumReport isospectral_check(const HbvmSpec& spec, double tol);

/// max |A P_{s+1} - P_{s+1} Xtilde_s|, with P_{s+1} taken at the tableau nodes.
double invariant_subspace_residual(const ButcherTableau& tab, int s);
double invariant_subspace_residual(const HbvmSpec& spec);

struct WTransformResiduals {
  /// P^T Omega P against blkdiag(I_s, R).
  double orthogonality = 0.0;
  /// P^{-1} A P against [Xhat_s 0; 0 0].
  double similarity = 0.0;
};

WTransformResiduals w_transform_check(const AbscissaeSystem& sys, int s);

/// Raised when I - zA is numerically singular.
class PoleError : public std::runtime_error {
 public:
  explicit PoleError(Complex z);
  Complex location() const { return z_; }

 private:
  Complex z_;
};

/// R(z) = 1 + z b^T (I - zA)^{-1} 1, by a linear solve.
Complex stability_function(const ButcherTableau& tab, Complex z);

struct StabilitySample {
  Complex z;
  Complex R;
};

struct StabilityGrid {
  int imag_points = 200;  // log grid of y on the imaginary axis
  double y_min = 1e-3;
  double y_max = 1e3;
  int lhp_points = 25;  // per axis, log-spaced magnitudes in the left half-plane
};

struct StabilityReport {
  double max_imag_deviation = 0.0;  // max ||R(iy)| - 1|
  double max_lhp_modulus = 0.0;     // max |R(z)|, Re z < 0
  StabilitySample worst_imag{};
  StabilitySample worst_lhp{};
  ComplexList poles;
  int samples = 0;
};

StabilityReport a_stability_scan(const ButcherTableau& tab, const StabilityGrid& grid = {});

/// Every structural check for one spec, as written into verification reports.
struct VerificationEntry {
  HbvmSpec spec;
  int zero_count = 0;
  double max_match_distance = 0.0;
  double subspace_residual = 0.0;
  double filter_residual = 0.0;
  std::optional<WTransformResiduals> wtransform;  // Gauss and Lobatto only
  double a_stability_max_deviation = 0.0;
  double a_stability_max_modulus = 0.0;
  bool passed = false;
};

VerificationEntry verify_spec(const HbvmSpec& spec, double tol);

/// Checks an externally supplied tableau of degree s against the same theorems,
/// with the reference HBVM tableau built on its own nodes.
VerificationEntry verify_tableau(const ButcherTableau& tab, const HbvmSpec& spec, double tol);

}  // namespace hbvm
