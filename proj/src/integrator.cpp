#include "hbvm/integrator.hpp"

#include <cmath>
#include <limits>

namespace hbvm {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kDivergenceRun = 5;
constexpr double kFloorRelTol = 1e-13;
constexpr double kPlateauRatio = 1.5;

MatrixXd jacobian_f(const HamiltonianSystem& sys, const VectorXd& y, JacobianSource source) {
  if (source == JacobianSource::UserSupplied) {
    if (!sys.hessH)
      throw std::invalid_argument("user-supplied Jacobian requested but the system has no Hessian");
    return sys.J * sys.hessH(y);
  }
  const Index n = y.size();
  const VectorXd f0 = sys.f(y);
  MatrixXd jac(n, n);
  const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  for (Index i = 0; i < n; ++i) {
    VectorXd yp = y;
    const double delta = root_eps * (1.0 + std::abs(y(i)));
    yp(i) += delta;
    jac.col(i) = (sys.f(yp) - f0) / delta;
  }
  return jac;
}

// Kronecker product C (x) Jf.
MatrixXd kron(const MatrixXd& c, const MatrixXd& jf) {
  const Index n = jf.rows();
  MatrixXd out(c.rows() * n, c.cols() * n);
  for (Index i = 0; i < c.rows(); ++i)
    for (Index j = 0; j < c.cols(); ++j) out.block(i * n, j * n, n, n) = c(i, j) * jf;
  return out;
}

struct SolveOutcome {
  MatrixXd z;
  StepDiagnostics diag;
};

// Solves Z = phi(Z) for an n x m block of unknowns. The simplified Newton
// matrix is I - h (C (x) Jf(y0)).
template <typename Phi>
SolveOutcome solve_fixed_point_system(const Phi& phi, const MatrixXd& z0, const MatrixXd& coupling,
                                      double h, const HamiltonianSystem& sys, const VectorXd& y0,
                                      const SolverConfig& cfg) {
  auto fixed_point = [&]() -> SolveOutcome {
    MatrixXd z = z0;
    double prev = std::numeric_limits<double>::infinity();
    int growth = 0;
    double res = prev;
    for (int it = 1; it <= cfg.max_iter; ++it) {
      MatrixXd next = phi(z);
      res = (next - z).cwiseAbs().maxCoeff();
      z = std::move(next);
      if (!std::isfinite(res)) break;
      if (res <= cfg.tol) return SolveOutcome{z, {it, res, SolverMode::FixedPoint, false}};
      growth = res > prev ? growth + 1 : 0;
      if (growth >= kDivergenceRun)
        throw SolverError("fixed-point iteration diverged; use Newton mode", res, true);
      prev = res;
    }
    throw SolverError("fixed-point iteration did not converge within max_iter", res, !std::isfinite(res));
  };

  auto newton = [&](bool fell_back) -> SolveOutcome {
    const Index n = z0.rows();
    const Index unknowns = z0.size();
    const MatrixXd m = MatrixXd::Identity(unknowns, unknowns) -
                       h * kron(coupling, jacobian_f(sys, y0, cfg.jacobian));
    const Eigen::PartialPivLU<MatrixXd> lu(m);
    MatrixXd z = z0;
    double res = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iter; ++it) {
      const MatrixXd g = z - phi(z);
      res = g.cwiseAbs().maxCoeff();
      if (!std::isfinite(res)) break;
      if (res <= cfg.tol) {
        z -= g;  // z <- phi(z)
        return {z, {it, res, SolverMode::Newton, fell_back}};
      }
      const VectorXd dz = lu.solve(g.reshaped());
      z -= dz.reshaped(n, z0.cols());
    }
    throw SolverError("simplified Newton did not converge within max_iter", res, false);
  };

  if (cfg.mode == SolverMode::Newton) return newton(false);
  try {
    return fixed_point();
  } catch (const SolverError&) {
    if (!cfg.newton_fallback) throw;
    return newton(true);
  }
}

}  // namespace

MatrixXd canonical_j(int dim) {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("canonical_j: dimension must be even");
  const int m = dim / 2;
  MatrixXd j = MatrixXd::Zero(dim, dim);
  j.topRightCorner(m, m) = MatrixXd::Identity(m, m);
  j.bottomLeftCorner(m, m) = -MatrixXd::Identity(m, m);
  return j;
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("solver max_iter must be >= 1");
}

namespace detail {

StepResult rk_step_signed(const ButcherTableau& tab, const HamiltonianSystem& sys,
                          const VectorXd& y0, double h, const SolverConfig& cfg) {
  validate(cfg);
  if (y0.size() != sys.dim) throw std::invalid_argument("rk_step: state dimension mismatch");
  const Index k = tab.stages();
  const Index n = y0.size();
  auto stage_f = [&](const MatrixXd& y) {
    MatrixXd f(n, k);
    for (Index i = 0; i < k; ++i) f.col(i) = sys.f(y.col(i));
    return f;
  };
  const MatrixXd base = y0.replicate(1, k);
  auto phi = [&](const MatrixXd& y) -> MatrixXd {
    return base + h * stage_f(y) * tab.A.transpose();
  };
  auto out = solve_fixed_point_system(phi, base, tab.A, h, sys, y0, cfg);
  return {y0 + h * stage_f(out.z) * tab.b, out.diag};
}

GammaStepResult gamma_step_signed(const HbvmMethod& method, const HamiltonianSystem& sys,
                                  const VectorXd& y0, double h, const SolverConfig& cfg) {
  validate(cfg);
  if (y0.size() != sys.dim) throw std::invalid_argument("gamma_step: state dimension mismatch");
  const auto& basis = method.basis;
  const Index k = basis.I_s.rows();
  const Index s = basis.I_s.cols();
  const Index n = y0.size();
  const MatrixXd weighted = basis.Omega() * basis.P_s;  // k x s
  const MatrixXd base = y0.replicate(1, k);
  auto stages = [&](const MatrixXd& gamma) -> MatrixXd {
    return base + h * gamma * basis.I_s.transpose();
  };
  auto phi = [&](const MatrixXd& gamma) -> MatrixXd {
    const MatrixXd y = stages(gamma);
    MatrixXd f(n, k);
    for (Index i = 0; i < k; ++i) f.col(i) = sys.f(y.col(i));
    return f * weighted;
  };
  const MatrixXd coupling = basis.P_s.transpose() * basis.Omega() * basis.I_s;
  auto out = solve_fixed_point_system(phi, MatrixXd::Zero(n, s), coupling, h, sys, y0, cfg);
  GammaStepResult result;
  result.y1 = y0 + h * out.z.col(0);
  result.state.stage_values = stages(out.z);
  result.state.gamma = std::move(out.z);
  result.diagnostics = out.diag;
  return result;
}

}  // namespace detail

StepResult rk_step(const ButcherTableau& tab, const HamiltonianSystem& sys, const VectorXd& y0,
                   double h, const SolverConfig& cfg) {
  if (!(h > 0.0)) throw std::invalid_argument("rk_step: step size must be positive");
  return detail::rk_step_signed(tab, sys, y0, h, cfg);
}

HbvmMethod make_method(const HbvmSpec& spec) {
  validate(spec);
  HbvmMethod m;
  m.spec = spec;
  m.nodes = abscissae(spec);
  m.basis = basis_matrices(m.nodes, spec.s);
  m.tableau = hbvm_tableau(m.nodes, spec.s);
  return m;
}

GammaStepResult gamma_step(const HbvmMethod& method, const HamiltonianSystem& sys,
                           const VectorXd& y0, double h, const SolverConfig& cfg) {
  if (!(h > 0.0)) throw std::invalid_argument("gamma_step: step size must be positive");
  return detail::gamma_step_signed(method, sys, y0, h, cfg);
}

GammaStepResult gamma_step(const HbvmSpec& spec, const HamiltonianSystem& sys,
                           const VectorXd& y0, double h, const SolverConfig& cfg) {
  return gamma_step(make_method(spec), sys, y0, h, cfg);
}

IntegrationError::IntegrationError(int step, const SolverError& cause)
    : std::runtime_error("step " + std::to_string(step) + ": " + cause.what()),
      step_(step),
      residual_(cause.residual()),
      diverged_(cause.diverged()) {}

namespace {

template <typename Step>
Trajectory run(const Step& step, const HamiltonianSystem& sys, const VectorXd& y0, double h,
               int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("integrate: step size must be positive");
  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(y0);
  traj.energies.push_back(sys.H(y0));
  traj.iteration_counts.push_back(0);
  VectorXd y = y0;
  for (int n = 1; n <= n_steps; ++n) {
    StepResult r;
    try {
      r = step(y);
    } catch (const SolverError& e) {
      throw IntegrationError(n, e);
    }
    y = std::move(r.y1);
    traj.times.push_back(n * h);
    traj.states.push_back(y);
    traj.energies.push_back(sys.H(y));
    traj.iteration_counts.push_back(r.diagnostics.iterations);
  }
  return traj;
}

}  // namespace

Trajectory integrate(const ButcherTableau& tab, const HamiltonianSystem& sys, const VectorXd& y0,
                     double h, int n_steps, const SolverConfig& cfg) {
  return run([&](const VectorXd& y) { return rk_step(tab, sys, y, h, cfg); }, sys, y0, h,
             n_steps);
}

Trajectory integrate(const HbvmMethod& method, Formulation form, const HamiltonianSystem& sys,
                     const VectorXd& y0, double h, int n_steps, const SolverConfig& cfg) {
  if (form == Formulation::Stages) return integrate(method.tableau, sys, y0, h, n_steps, cfg);
  return run(
      [&](const VectorXd& y) {
        auto g = gamma_step(method, sys, y, h, cfg);
        return StepResult{std::move(g.y1), g.diagnostics};
      },
      sys, y0, h, n_steps);
}

EnergyDrift energy_drift(const Trajectory& traj, const HamiltonianSystem& sys) {
  if (traj.states.empty()) throw std::invalid_argument("energy_drift: empty trajectory");
  const double h0 = sys.H(traj.states.front());
  EnergyDrift drift;
  for (const auto& y : traj.states) drift.max_abs = std::max(drift.max_abs, std::abs(sys.H(y) - h0));
  drift.final_abs = std::abs(sys.H(traj.states.back()) - h0);
  return drift;
}

std::vector<double> halving_step_sizes(double t_end, double h_max, int levels) {
  if (!(t_end > 0.0) || !(h_max > 0.0) || levels < 1)
    throw std::invalid_argument("halving_step_sizes: need t_end > 0, h_max > 0, levels >= 1");
  const double n0 = std::ceil(t_end / h_max - 1e-9);
  std::vector<double> hs;
  for (int i = 0; i < levels; ++i) hs.push_back(t_end / (n0 * std::ldexp(1.0, i)));
  return hs;
}

OrderStudy convergence_order(const HbvmMethod& method, Formulation form,
                             const HamiltonianSystem& sys, const VectorXd& y0,
                             const std::function<VectorXd(double)>& reference, double t_end,
                             const std::vector<double>& step_sizes, const SolverConfig& cfg) {
  if (step_sizes.size() < 3) throw std::invalid_argument("convergence_order: need >= 3 step sizes");
  for (std::size_t i = 1; i < step_sizes.size(); ++i)
    if (!(step_sizes[i] < step_sizes[i - 1]))
      throw std::invalid_argument("convergence_order: step sizes must decrease");

  OrderStudy study;
  const VectorXd exact = reference(t_end);
  const double floor = kFloorRelTol * std::max(1.0, exact.cwiseAbs().maxCoeff());
  for (double h : step_sizes) {
    const double steps = t_end / h;
    const int n = static_cast<int>(std::lround(steps));
    if (n < 1 || std::abs(steps - n) > 1e-9 * steps)
      throw std::invalid_argument("convergence_order: t_end must be a multiple of every h");
    const auto traj = integrate(method, form, sys, y0, h, n, cfg);
    study.step_sizes.push_back(h);
    study.errors.push_back((traj.states.back() - exact).cwiseAbs().maxCoeff());
  }

  // Keep the leading run of points above the floor that still decrease at a
  // visible rate; everything after the first stall is round-off.
  study.used.assign(study.errors.size(), false);
  for (std::size_t i = 0; i < study.errors.size(); ++i) {
    if (study.errors[i] <= floor) break;
    if (i > 0 && study.errors[i - 1] / study.errors[i] < kPlateauRatio) break;
    study.used[i] = true;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < study.errors.size(); ++i) {
    if (!study.used[i]) continue;
    const double x = std::log(study.step_sizes[i]);
    const double y = std::log(study.errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2)
    throw std::runtime_error("convergence_order: fewer than two points above the round-off floor");
  study.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return study;
}

}  // namespace hbvm
