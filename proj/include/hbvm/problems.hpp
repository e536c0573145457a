#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hbvm/integrator.hpp"

namespace hbvm {

struct ProblemSpec {
  std::string name;
  HamiltonianSystem system;
  /// Exact flow from default_y0, when known.
  std::function<Eigen::VectorXd(double)> reference_solution;
  Eigen::VectorXd default_y0;
  /// Natural time scale for order studies (a period where one exists).
  double period = 0.0;
  std::string notes;
};

/// harmonic, quartic, sextic, henon_heiles, pendulum, kepler.
const std::vector<ProblemSpec>& catalog();

/// Looks a problem up by name; throws std::invalid_argument if unknown.
const ProblemSpec& find_problem(const std::string& name);

/// Kepler problem started at pericentre with semi-major axis 1.
ProblemSpec kepler_problem(double eccentricity);

/// Solves E - e sin E = M by Newton iteration (tolerance 1e-14).
double solve_kepler_equation(double mean_anomaly, double eccentricity);

}  // namespace hbvm
