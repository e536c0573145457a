#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbvm/tableau.hpp"

namespace hbvm {

/// y' = J grad H(y) on R^{2m}, states ordered (q, p).
struct HamiltonianSystem {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> H;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradH;
  /// Optional; needed only for JacobianSource::UserSupplied.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessH;
  Eigen::MatrixXd J;
  std::optional<int> poly_degree;

  Eigen::VectorXd f(const Eigen::VectorXd& y) const { return J * gradH(y); }
};

/// [[0, I], [-I, 0]] of size dim.
Eigen::MatrixXd canonical_j(int dim);

enum class SolverMode { FixedPoint, Newton };
enum class JacobianSource { FiniteDifference, UserSupplied };

struct SolverConfig {
  SolverMode mode = SolverMode::FixedPoint;
  double tol = 1e-13;  // max-norm of the fixed-point residual
  int max_iter = 100;
  JacobianSource jacobian = JacobianSource::FiniteDifference;
  bool newton_fallback = true;  // retry a failed fixed-point solve with simplified Newton
};

void validate(const SolverConfig& cfg);

/// Stage solve failure. `diverged()` is set when fixed-point residuals grew for
/// five consecutive iterations; Newton mode is then the suggested remedy.
class SolverError : public ConvergenceError {
 public:
  SolverError(const std::string& what, double residual, bool diverged)
      : ConvergenceError(what, residual), diverged_(diverged) {}
  bool diverged() const { return diverged_; }

 private:
  bool diverged_;
};

struct StepDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  SolverMode mode = SolverMode::FixedPoint;
  bool fell_back = false;
};

struct StepResult {
  Eigen::VectorXd y1;
  StepDiagnostics diagnostics;
};

/// One step of the k-stage Runge-Kutta form:
///   Y_i = y0 + h sum_j A_ij f(Y_j),   y1 = y0 + h sum_i b_i f(Y_i).
StepResult rk_step(const ButcherTableau& tab, const HamiltonianSystem& sys,
                   const Eigen::VectorXd& y0, double h, const SolverConfig& cfg = {});

/// Precomputed data for an HBVM(k,s) method.
struct HbvmMethod {
  HbvmSpec spec;
  AbscissaeSystem nodes;
  BasisMatrices basis;
  ButcherTableau tableau;
};

HbvmMethod make_method(const HbvmSpec& spec);

/// Expansion coefficients of sigma' (one column per gamma_j) and the stage
/// values sigma(t0 + tau_l h) (one column per node).
struct GammaState {
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd stage_values;
};

struct GammaStepResult {
  Eigen::VectorXd y1;
  GammaState state;
  StepDiagnostics diagnostics;
};

/// One step in the reduced form with s*2m unknowns:
///   gamma_j = sum_l omega_l P_j(tau_l) f(y0 + h sum_i I_s(l,i) gamma_i),
///   y1 = y0 + h gamma_1.
GammaStepResult gamma_step(const HbvmMethod& method, const HamiltonianSystem& sys,
                           const Eigen::VectorXd& y0, double h, const SolverConfig& cfg = {});
GammaStepResult gamma_step(const HbvmSpec& spec, const HamiltonianSystem& sys,
                           const Eigen::VectorXd& y0, double h, const SolverConfig& cfg = {});

namespace detail {
// Same as the public steps but accept h < 0 (backward stepping).
StepResult rk_step_signed(const ButcherTableau& tab, const HamiltonianSystem& sys,
                          const Eigen::VectorXd& y0, double h, const SolverConfig& cfg);
GammaStepResult gamma_step_signed(const HbvmMethod& method, const HamiltonianSystem& sys,
                                  const Eigen::VectorXd& y0, double h, const SolverConfig& cfg);
}  // namespace detail

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> energies;
  std::vector<int> iteration_counts;  // 0 for the initial state
};

/// Failure inside integrate(); `step()` is the 1-based index of the failed step.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(int step, const SolverError& cause);
  int step() const { return step_; }
  double residual() const { return residual_; }
  bool diverged() const { return diverged_; }

 private:
  int step_;
  double residual_;
  bool diverged_;
};

enum class Formulation { Stages, Gamma };

Trajectory integrate(const ButcherTableau& tab, const HamiltonianSystem& sys,
                     const Eigen::VectorXd& y0, double h, int n_steps,
                     const SolverConfig& cfg = {});
Trajectory integrate(const HbvmMethod& method, Formulation form, const HamiltonianSystem& sys,
                     const Eigen::VectorXd& y0, double h, int n_steps,
                     const SolverConfig& cfg = {});

struct EnergyDrift {
  double max_abs = 0.0;
  double final_abs = 0.0;
};

/// max_n |H(y_n) - H(y_0)| and the last deviation.
EnergyDrift energy_drift(const Trajectory& traj, const HamiltonianSystem& sys);

struct OrderStudy {
  std::vector<double> step_sizes;
  std::vector<double> errors;
  std::vector<bool> used;  // false where the point sits on the round-off floor
  double slope = 0.0;
};

/// `levels` step sizes, halving from the largest h <= h_max that divides t_end.
std::vector<double> halving_step_sizes(double t_end, double h_max, int levels);

/// Least-squares slope of log(error) against log(h) at t_end. Points on the
/// round-off plateau are dropped before fitting.
OrderStudy convergence_order(const HbvmMethod& method, Formulation form,
                             const HamiltonianSystem& sys, const Eigen::VectorXd& y0,
                             const std::function<Eigen::VectorXd(double)>& reference,
                             double t_end, const std::vector<double>& step_sizes,
                             const SolverConfig& cfg = {});

}  // namespace hbvm
