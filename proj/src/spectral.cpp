#include "hbvm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hbvm {

namespace {

constexpr double kZeroRelTol = 1e-8;
constexpr double kPoleRcond = 1e3 * std::numeric_limits<double>::epsilon();

bool complex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

WTransformResiduals w_transform(const AbscissaeSystem& sys, const Eigen::MatrixXd& A, int s) {
  const Eigen::Index k = sys.size();
  if (s < 1 || s > k) throw std::invalid_argument("w_transform_check: need 1 <= s <= k");
  Eigen::MatrixXd P(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    P.row(i) = orthonormal_values<double>(static_cast<int>(k), sys.tau(i)).transpose();

  WTransformResiduals out;
  const Eigen::MatrixXd gram = P.transpose() * sys.omega.asDiagonal() * P;
  const Eigen::Index r = k - s;
  out.orthogonality =
      (gram.topLeftCorner(s, s) - Eigen::MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff();
  if (r > 0) {
    out.orthogonality = std::max({out.orthogonality, gram.topRightCorner(s, r).cwiseAbs().maxCoeff(),
                                  gram.bottomLeftCorner(r, s).cwiseAbs().maxCoeff()});
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(P);
  if (lu.rcond() < kPoleRcond) throw std::runtime_error("w_transform_check: enlarged basis matrix is singular");
  const Eigen::MatrixXd similar = lu.solve(A * P);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(k, k);
  const Eigen::Index rows = std::min<Eigen::Index>(s + 1, k);
  expected.topLeftCorner(rows, s) = xhat_matrix(s).topRows(rows);
  out.similarity = (similar - expected).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace

Eigen::MatrixXd balance(const Eigen::MatrixXd& m) {
  constexpr double radix = 2.0;
  constexpr double radix_sq = radix * radix;
  Eigen::MatrixXd a = m;
  const Eigen::Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
      double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
      if (c == 0.0 || r == 0.0) continue;
      const double total = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix_sq;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix_sq;
      }
      if ((c + r) / f < 0.95 * total) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return a;
}

ComplexList eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver;
  solver.setMaxIterations(30 * n);
  solver.compute(balance(m), false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("eigenvalues: QR iteration did not converge in 30n sweeps",
                           std::numeric_limits<double>::quiet_NaN());
  const Eigen::VectorXcd ev = solver.eigenvalues();
  return ComplexList(ev.data(), ev.data() + n);
}

double match_distance(ComplexList values, ComplexList reference) {
  if (values.size() != reference.size()) return std::numeric_limits<double>::infinity();
  std::sort(values.begin(), values.end(), complex_less);
  std::sort(reference.begin(), reference.end(), complex_less);
  std::vector<bool> used(reference.size(), false);
  double worst = 0.0;
  for (const auto& v : values) {
    std::size_t best = reference.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < reference.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(v - reference[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

SpectrumReport isospectral_check(const Eigen::MatrixXd& A, int s, double tol) {
  if (s < 1 || s > A.rows()) throw std::invalid_argument("isospectral_check: need 1 <= s <= k");
  SpectrumReport report;
  report.eigenvalues = eigenvalues(A);
  report.reference = eigenvalues(xs_matrix(s));
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  report.zero_threshold = kZeroRelTol * std::max(1.0, norm);
  for (const auto& lambda : report.eigenvalues) {
    if (std::abs(lambda) <= report.zero_threshold)
      ++report.zero_count;
    else
      report.nonzero.push_back(lambda);
  }
  report.max_match_distance = match_distance(report.nonzero, report.reference);
  report.passed = report.zero_count == A.rows() - s && report.max_match_distance <= tol;
  return report;
}

SpectrumReport isospectral_check(const HbvmSpec& spec, double tol) {
  return isospectral_check(hbvm_tableau(spec).A, spec.s, tol);
}

double invariant_subspace_residual(const ButcherTableau& tab, int s) {
  const Eigen::Index k = tab.stages();
  Eigen::MatrixXd P(k, s + 1);
  for (Eigen::Index i = 0; i < k; ++i)
    P.row(i) = orthonormal_values<double>(s + 1, tab.c(i)).transpose();
  return (tab.A * P - P * xtilde_matrix(s)).cwiseAbs().maxCoeff();
}

double invariant_subspace_residual(const HbvmSpec& spec) {
  return invariant_subspace_residual(hbvm_tableau(spec), spec.s);
}

WTransformResiduals w_transform_check(const AbscissaeSystem& sys, int s) {
  if (exactness_degree(sys, 1e-12) < 2 * s - 1)
    throw WeakQuadratureError("w_transform_check: quadrature too weak for B(2s)");
  return w_transform(sys, hbvm_tableau(sys, s).A, s);
}

namespace {

std::string pole_message(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << "stability function has a pole at z = " << z.real() << (z.imag() < 0 ? " - " : " + ")
     << std::abs(z.imag()) << "i";
  return os.str();
}

}  // namespace

PoleError::PoleError(Complex z) : std::runtime_error(pole_message(z)), z_(z) {}

Complex stability_function(const ButcherTableau& tab, Complex z) {
  const Eigen::Index k = tab.stages();
  const Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Identity(k, k) - z * tab.A.cast<Complex>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  if (lu.rcond() < kPoleRcond) throw PoleError(z);
  const Eigen::VectorXcd x = lu.solve(Eigen::VectorXcd::Ones(k));
  return Complex(1.0) + z * tab.b.cast<Complex>().dot(x);
}

StabilityReport a_stability_scan(const ButcherTableau& tab, const StabilityGrid& grid) {
  StabilityReport report;
  auto log_point = [](double lo, double hi, int i, int n) {
    if (n == 1) return lo;
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  };
  auto sample = [&](Complex z) -> std::optional<Complex> {
    ++report.samples;
    try {
      return stability_function(tab, z);
    } catch (const PoleError& e) {
      report.poles.push_back(e.location());
      return std::nullopt;
    }
  };

  for (int i = 0; i < grid.imag_points; ++i) {
    const Complex z(0.0, log_point(grid.y_min, grid.y_max, i, grid.imag_points));
    if (const auto r = sample(z)) {
      const double dev = std::abs(std::abs(*r) - 1.0);
      if (dev >= report.max_imag_deviation) {
        report.max_imag_deviation = dev;
        report.worst_imag = {z, *r};
      }
    }
  }

  // Real parts -10^u and imaginary parts 0, +-10^v with u, v log-spaced.
  std::vector<double> imag_parts{0.0};
  for (int j = 0; j < grid.lhp_points; ++j) {
    const double y = log_point(grid.y_min, grid.y_max, j, grid.lhp_points);
    imag_parts.push_back(y);
    imag_parts.push_back(-y);
  }
  for (int i = 0; i < grid.lhp_points; ++i) {
    const double x = -log_point(grid.y_min, grid.y_max, i, grid.lhp_points);
    for (double y : imag_parts) {
      const Complex z(x, y);
      if (const auto r = sample(z)) {
        if (std::abs(*r) >= report.max_lhp_modulus) {
          report.max_lhp_modulus = std::abs(*r);
          report.worst_lhp = {z, *r};
        }
      }
    }
  }
  return report;
}

VerificationEntry verify_tableau(const ButcherTableau& tab, const HbvmSpec& spec, double tol) {
  if (tab.stages() != spec.k)
    throw std::invalid_argument("verify_tableau: tableau has " + std::to_string(tab.stages()) +
                                " stages but the spec says k = " + std::to_string(spec.k));
  HbvmSpec own = spec;
  if (own.family == NodeFamily::Custom) own.nodes = tab.c;
  validate(own);
  const AbscissaeSystem sys = abscissae(own);

  VerificationEntry entry;
  entry.spec = own;
  const auto spectrum = isospectral_check(tab.A, spec.s, tol);
  entry.zero_count = spectrum.zero_count;
  entry.max_match_distance = spectrum.max_match_distance;
  entry.subspace_residual = invariant_subspace_residual(tab, spec.s);
  entry.filter_residual = (filtered_tableau(sys, spec.s).A - tab.A).cwiseAbs().maxCoeff();
  if (own.family != NodeFamily::Custom) entry.wtransform = w_transform(sys, tab.A, spec.s);

  const auto stability = a_stability_scan(tab);
  entry.a_stability_max_deviation = stability.max_imag_deviation;
  entry.a_stability_max_modulus = stability.max_lhp_modulus;

  entry.passed = spectrum.passed && entry.subspace_residual <= tol && entry.filter_residual <= tol &&
                 entry.a_stability_max_deviation <= tol &&
                 entry.a_stability_max_modulus <= 1.0 + tol && stability.poles.empty();
  if (entry.wtransform)
    entry.passed = entry.passed && entry.wtransform->orthogonality <= tol &&
                   entry.wtransform->similarity <= tol;
  return entry;
}

VerificationEntry verify_spec(const HbvmSpec& spec, double tol) {
  return verify_tableau(hbvm_tableau(spec), spec, tol);
}

}  // namespace hbvm
