#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hbvm/cli.hpp"
#include "hbvm/integrator.hpp"
#include "hbvm/problems.hpp"
#include "hbvm/spectral.hpp"
#include "oracles.hpp"

using namespace hbvm;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

const std::vector<HbvmSpec>& spec_matrix() {
  static const auto specs = cli::verify_matrix(4, 10, 42);
  return specs;
}

HbvmSpec gauss(int k, int s) { return {k, s, NodeFamily::Gauss, {}}; }

Outcome isospectrality() {
  double worst_match = 0.0;
  int bad_zero_counts = 0;
  for (const auto& spec : spec_matrix()) {
    const auto values = eigenvalues(hbvm_tableau(spec).A);
    ComplexList nonzero;
    int zeros = 0;
    for (const auto& z : values) {
      if (std::abs(z) <= 1e-8)
        ++zeros;
      else
        nonzero.push_back(z);
    }
    if (zeros != spec.k - spec.s) ++bad_zero_counts;
    worst_match = std::max(worst_match, match_distance(nonzero, eigenvalues(xs_matrix(spec.s))));
  }
  return {bad_zero_counts == 0 && worst_match <= 1e-10,
          std::to_string(spec_matrix().size()) + " specs, zero-count mismatches " +
              std::to_string(bad_zero_counts) + ", max match distance " + fmt("%.3e", worst_match)};
}

Outcome gauss_reduction() {
  double worst = 0.0;
  for (int s = 1; s <= 4; ++s) {
    const auto tab = hbvm_tableau(gauss(s, s));
    const auto ref = oracle::classical_gauss(s);
    worst = std::max({worst, max_abs(tab.A - ref.A), max_abs(tab.b - ref.b), max_abs(tab.c - ref.c)});
  }
  return {worst <= 1e-13, "max entry difference " + fmt("%.3e", worst)};
}

Outcome collocation_filtering() {
  double filter = 0.0, interp = 0.0;
  for (const auto& spec : spec_matrix()) {
    const auto sys = abscissae(spec);
    filter = std::max(filter, max_abs(filtered_tableau(sys, spec.s).A - hbvm_tableau(spec).A));
    const auto basis = basis_matrices(sys, spec.s);
    interp = std::max(interp, max_abs(basis.I_s - collocation_matrix(sys.tau) * basis.P_s));
  }
  return {filter <= 1e-12 && interp <= 1e-12,
          "filter " + fmt("%.3e", filter) + ", I_s - AP_s " + fmt("%.3e", interp)};
}

Outcome transfer_identity() {
  double worst = 0.0;
  for (const auto& spec : spec_matrix()) {
    const auto basis = basis_matrices(abscissae(spec), spec.s);
    worst = std::max(worst, max_abs(basis.I_s - basis.P_splus1 * xhat_matrix(spec.s)));
  }
  return {worst <= 1e-13, "max residual " + fmt("%.3e", worst)};
}

Outcome similarity_structure() {
  double orth = 0.0, sim = 0.0;
  int count = 0;
  for (int s = 1; s <= 4; ++s)
    for (int k = s; k <= 10; ++k) {
      std::vector<AbscissaeSystem> systems{gauss_system(k)};
      if (k >= std::max(2, s + 1)) systems.push_back(lobatto_system(k));
      for (const auto& sys : systems) {
        const auto r = w_transform_check(sys, s);
        orth = std::max(orth, r.orthogonality);
        sim = std::max(sim, r.similarity);
        ++count;
      }
    }
  return {orth <= 1e-11 && sim <= 1e-11, std::to_string(count) + " systems, orthogonality " +
                                             fmt("%.3e", orth) + ", similarity " + fmt("%.3e", sim)};
}

Outcome measured_order() {
  struct Case {
    const ProblemSpec* problem;
    double h_max;
  };
  static const ProblemSpec kepler = kepler_problem(0.6);
  const std::vector<Case> cases{{&kepler, 0.1}, {&find_problem("harmonic"), 0.2}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases)
    for (const auto& [k, s] : std::vector<std::pair<int, int>>{{4, 2}, {6, 2}, {6, 3}}) {
      const auto& p = *c.problem;
      const auto study =
          convergence_order(make_method(gauss(k, s)), Formulation::Gamma, p.system, p.default_y0,
                            p.reference_solution, p.period, halving_step_sizes(p.period, c.h_max, 4));
      ok = ok && std::abs(study.slope - 2 * s) <= 0.2;
      detail += (detail.empty() ? "" : ", ") + p.name + "(" + std::to_string(k) + "," +
                std::to_string(s) + ") " + fmt("%.3f", study.slope);
    }
  return {ok, "slopes " + detail};
}

Outcome energy_conservation() {
  auto drift = [](const std::string& name, int k, int s) {
    const auto& p = find_problem(name);
    const auto traj = integrate(hbvm_tableau(gauss(k, s)), p.system, p.default_y0, 0.1, 1000);
    return energy_drift(traj, p.system).max_abs / std::abs(p.system.H(p.default_y0));
  };
  const double sextic = drift("sextic", 6, 2);
  const double quartic = drift("quartic", 4, 2);
  const double contrast = drift("quartic", 2, 2);
  return {sextic <= 1e-11 && quartic <= 1e-11 && contrast > 1e-8,
          "sextic(6,2) " + fmt("%.3e", sextic) + ", quartic(4,2) " + fmt("%.3e", quartic) +
              ", quartic(2,2) " + fmt("%.3e", contrast)};
}

Outcome a_stability() {
  double deviation = 0.0, modulus = 0.0;
  std::size_t poles = 0;
  for (const auto& spec : spec_matrix()) {
    const auto r = a_stability_scan(hbvm_tableau(spec));
    deviation = std::max(deviation, r.max_imag_deviation);
    modulus = std::max(modulus, r.max_lhp_modulus);
    poles += r.poles.size();
  }
  return {deviation <= 1e-10 && modulus <= 1.0 + 1e-10 && poles == 0,
          "max ||R(iy)|-1| " + fmt("%.3e", deviation) + ", max |R(z)| " + fmt("%.17g", modulus)};
}

Outcome symmetry() {
  const auto& p = find_problem("henon_heiles");
  const SolverConfig cfg;
  double worst = 0.0;
  for (const auto& spec : {gauss(3, 2), gauss(6, 3)}) {
    const auto tab = hbvm_tableau(spec);
    const auto fwd = rk_step(tab, p.system, p.default_y0, 0.1, cfg);
    const auto back = detail::rk_step_signed(tab, p.system, fwd.y1, -0.1, cfg);
    worst = std::max(worst, max_abs(back.y1 - p.default_y0));
  }
  return {worst <= 100 * cfg.tol, "max round-trip error " + fmt("%.3e", worst)};
}

Outcome formulation_equivalence() {
  const SolverConfig cfg;
  const auto method = make_method(gauss(6, 2));
  double worst = 0.0;
  for (const auto& p : catalog()) {
    const auto g = gamma_step(method, p.system, p.default_y0, 0.1, cfg);
    const auto r = rk_step(method.tableau, p.system, p.default_y0, 0.1, cfg);
    worst = std::max(worst, max_abs(g.y1 - r.y1));
  }
  return {worst <= 10 * cfg.tol, std::to_string(catalog().size()) + " problems, max difference " +
                                     fmt("%.3e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"isospectrality", isospectrality},
      {"Gauss reduction", gauss_reduction},
      {"collocation filtering", collocation_filtering},
      {"transfer identity", transfer_identity},
      {"similarity/order structure", similarity_structure},
      {"measured order 2s", measured_order},
      {"energy conservation threshold", energy_conservation},
      {"perfect A-stability", a_stability},
      {"symmetry round-trip", symmetry},
      {"formulation equivalence", formulation_equivalence},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("%s criterion %zu (%s): %s\n", o.passed ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
