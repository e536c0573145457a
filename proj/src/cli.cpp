#include "hbvm/cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "hbvm/integrator.hpp"
#include "hbvm/io.hpp"
#include "hbvm/problems.hpp"
#include "hbvm/spectral.hpp"

namespace hbvm::cli {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

struct SpecOptions {
  int k = 0;
  int s = 0;
  std::string family = "gauss";
  std::vector<double> nodes;
};

void add_spec_options(CLI::App* cmd, SpecOptions& o, bool required = true) {
  auto* k = cmd->add_option("--k", o.k, "number of stages");
  auto* s = cmd->add_option("--s", o.s, "degree of the method");
  if (required) {
    k->required();
    s->required();
  }
  cmd->add_option("--family", o.family, "node family: gauss, lobatto or custom")
      ->check(CLI::IsMember({"gauss", "lobatto", "custom"}));
  cmd->add_option("--nodes", o.nodes, "comma-separated nodes for --family custom")->delimiter(',');
}

HbvmSpec make_spec(const SpecOptions& o) {
  HbvmSpec spec{o.k, o.s, parse_family(o.family), {}};
  if (spec.family == NodeFamily::Custom) {
    if (o.nodes.empty()) throw UsageError("--family custom requires --nodes");
    spec.nodes = Eigen::Map<const Eigen::VectorXd>(o.nodes.data(), static_cast<Eigen::Index>(o.nodes.size()));
  } else if (!o.nodes.empty()) {
    throw UsageError("--nodes is only valid with --family custom");
  }
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return spec;
}

bool use_color() { return std::getenv("HBVM_NO_COLOR") == nullptr && ::isatty(STDOUT_FILENO); }

std::string verdict(bool ok) {
  if (!use_color()) return ok ? "PASS" : "FAIL";
  return ok ? "\033[32mPASS\033[0m" : "\033[31mFAIL\033[0m";
}

// Machine output: to the file when a path is given, else to `out`.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  file << text;
}

std::ostream& summary_stream(const std::string& path, const Streams& io) {
  return path.empty() ? io.err : io.out;
}

HbvmSpec spec_of(const TableauRecord& r) {
  HbvmSpec spec{r.k, r.s, r.family, {}};
  if (r.family == NodeFamily::Custom) spec.nodes = r.tableau.c;
  return spec;
}

int cmd_tableau(const SpecOptions& o, const std::string& out_path, const Streams& io) {
  const HbvmSpec spec = make_spec(o);
  std::ostringstream text;
  write_tableau_json(text, {spec.k, spec.s, spec.family, hbvm_tableau(spec)});
  emit(text.str(), out_path, io.out);
  return kExitOk;
}

int cmd_spectrum(const SpecOptions& o, const std::string& tableau_file, double tol,
                 const std::string& out_path, const Streams& io) {
  HbvmSpec spec;
  Eigen::MatrixXd A;
  if (!tableau_file.empty()) {
    TableauRecord r;
    try {
      r = read_tableau_json(tableau_file);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    spec = spec_of(r);
    A = r.tableau.A;
  } else {
    if (o.k == 0 || o.s == 0) throw UsageError("spectrum needs --k and --s, or --tableau-file");
    spec = make_spec(o);
    A = hbvm_tableau(spec).A;
  }
  const auto report = isospectral_check(A, spec.s, tol);
  std::ostringstream text;
  write_spectrum_report(text, spec, report);
  emit(text.str(), out_path, io.out);
  summary_stream(out_path, io) << "spectrum: zero_count=" << report.zero_count
                               << " max_match_distance=" << format_real(report.max_match_distance)
                               << ' ' << verdict(report.passed) << '\n';
  return report.passed ? kExitOk : kExitFailed;
}

int cmd_verify(int smax, int kmax, double tol, std::uint64_t seed, const std::string& tableau_file,
               const std::string& out_path, const Streams& io) {
  std::vector<VerificationEntry> entries;
  if (!tableau_file.empty()) {
    TableauRecord r;
    try {
      r = read_tableau_json(tableau_file);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    entries.push_back(verify_tableau(r.tableau, spec_of(r), tol));
  } else {
    if (smax < 1 || smax > kMaxDegree) throw UsageError("--smax must lie in [1, 6]");
    if (kmax < smax || kmax > kMaxStages) throw UsageError("--kmax must lie in [smax, 12]");
    for (const auto& spec : verify_matrix(smax, kmax, seed)) entries.push_back(verify_spec(spec, tol));
  }
  std::ostringstream text;
  write_verification_report(text, entries);
  emit(text.str(), out_path, io.out);

  auto& summary = summary_stream(out_path, io);
  int failed = 0;
  for (const auto& e : entries) {
    if (e.passed) continue;
    ++failed;
    summary << "  " << verdict(false) << " k=" << e.spec.k << " s=" << e.spec.s << ' '
            << to_string(e.spec.family) << " match=" << format_real(e.max_match_distance)
            << " zeros=" << e.zero_count << '\n';
  }
  summary << "verify: " << entries.size() << " specs, " << failed << " failed "
          << verdict(failed == 0) << '\n';
  return failed == 0 ? kExitOk : kExitFailed;
}

SolverConfig solver_config(const std::string& solver, double tol, int max_iter) {
  SolverConfig cfg;
  cfg.mode = solver == "newton" ? SolverMode::Newton : SolverMode::FixedPoint;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

const ProblemSpec& problem_or_usage(const std::string& name) {
  try {
    return find_problem(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_integrate(const SpecOptions& o, const std::string& problem_name, double h, int steps,
                  const std::string& mode, const std::string& solver, double tol, int max_iter,
                  const std::vector<double>& y0_values, const std::string& out_path,
                  const Streams& io) {
  const auto& problem = problem_or_usage(problem_name);
  const HbvmSpec spec = make_spec(o);
  if (!(h > 0.0)) throw UsageError("--h must be positive");
  if (steps < 1) throw UsageError("--steps must be >= 1");
  const SolverConfig cfg = solver_config(solver, tol, max_iter);
  Eigen::VectorXd y0 = problem.default_y0;
  if (!y0_values.empty()) {
    if (static_cast<int>(y0_values.size()) != problem.system.dim)
      throw UsageError("--y0 must have " + std::to_string(problem.system.dim) + " entries");
    y0 = Eigen::Map<const Eigen::VectorXd>(y0_values.data(), problem.system.dim);
  }

  const HbvmMethod method = make_method(spec);
  Trajectory traj;
  try {
    traj = integrate(method, mode == "gamma" ? Formulation::Gamma : Formulation::Stages,
                     problem.system, y0, h, steps, cfg);
  } catch (const IntegrationError& e) {
    io.err << "integrate: " << e.what() << " (residual " << format_real(e.residual()) << ")\n";
    return kExitFailed;
  }
  std::ostringstream text;
  write_trajectory_csv(text, traj);
  emit(text.str(), out_path, io.out);

  const auto drift = energy_drift(traj, problem.system);
  const double scale = std::abs(traj.energies.front()) > 0.0 ? std::abs(traj.energies.front()) : 1.0;
  long total_iters = 0;
  for (int it : traj.iteration_counts) total_iters += it;
  summary_stream(out_path, io) << "integrate: " << problem.name << " HBVM(" << spec.k << ","
                               << spec.s << ") " << to_string(spec.family) << " h=" << h
                               << " steps=" << steps << " iterations=" << total_iters
                               << "\n  max |H-H0|/|H0| = " << format_real(drift.max_abs / scale)
                               << "\n  final |H-H0|/|H0| = " << format_real(drift.final_abs / scale)
                               << '\n';
  return kExitOk;
}

int cmd_order(const SpecOptions& o, const std::string& problem_name, double hmax, int levels,
              double t_end, const std::string& mode, const std::string& out_path, const Streams& io) {
  const auto& problem = problem_or_usage(problem_name);
  if (!problem.reference_solution)
    throw UsageError("problem '" + problem.name + "' has no reference solution");
  const HbvmSpec spec = make_spec(o);
  if (levels < 3) throw UsageError("--levels must be >= 3");
  if (!(hmax > 0.0)) throw UsageError("--hmax must be positive");
  if (t_end <= 0.0) t_end = problem.period;

  OrderStudy study;
  try {
    study = convergence_order(make_method(spec), mode == "gamma" ? Formulation::Gamma : Formulation::Stages,
                              problem.system, problem.default_y0, problem.reference_solution, t_end,
                              halving_step_sizes(t_end, hmax, levels));
  } catch (const IntegrationError& e) {
    io.err << "order: " << e.what() << '\n';
    return kExitFailed;
  } catch (const std::runtime_error& e) {
    io.err << "order: " << e.what() << '\n';
    return kExitFailed;
  }

  std::ostringstream table;
  table << "order: " << problem.name << " HBVM(" << spec.k << "," << spec.s << ") "
        << to_string(spec.family) << " t_end=" << format_real(t_end) << '\n';
  table << std::setw(24) << "h" << std::setw(26) << "error" << "  used\n";
  for (std::size_t i = 0; i < study.errors.size(); ++i)
    table << std::setw(24) << format_real(study.step_sizes[i]) << std::setw(26)
          << format_real(study.errors[i]) << "  " << (study.used[i] ? "yes" : "no") << '\n';
  table << "slope = " << std::fixed << std::setprecision(4) << study.slope
        << " (expected " << 2 * spec.s << ")\n";
  io.out << table.str();
  if (!out_path.empty()) {
    std::ostringstream json;
    write_order_report(json, problem.name, spec, study);
    emit(json.str(), out_path, io.out);
  }
  return kExitOk;
}

int cmd_stability(const SpecOptions& o, double tol, const std::string& out_path, const Streams& io) {
  const HbvmSpec spec = make_spec(o);
  const auto report = a_stability_scan(hbvm_tableau(spec));
  std::ostringstream text;
  write_stability_report(text, spec, report);
  emit(text.str(), out_path, io.out);
  const bool ok = report.poles.empty() && report.max_imag_deviation <= tol &&
                  report.max_lhp_modulus <= 1.0 + tol;
  summary_stream(out_path, io) << "stability: max ||R(iy)|-1| = " << format_real(report.max_imag_deviation)
                               << ", max |R(z)| (Re z < 0) = " << format_real(report.max_lhp_modulus)
                               << ' ' << verdict(ok) << '\n';
  return ok ? kExitOk : kExitFailed;
}

}  // namespace

Eigen::VectorXd random_nodes(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.1, 0.9);
  Eigen::VectorXd tau(k);
  for (int i = 0; i < k; ++i) tau(i) = (i + jitter(rng)) / k;
  return tau;
}

std::vector<HbvmSpec> verify_matrix(int smax, int kmax, std::uint64_t seed) {
  constexpr int kRandomSets = 3;
  std::vector<HbvmSpec> specs;
  for (int s = 1; s <= smax; ++s) {
    for (int k = s; k <= kmax; ++k) {
      specs.push_back({k, s, NodeFamily::Gauss, {}});
      if (k >= std::max(2, s + 1)) specs.push_back({k, s, NodeFamily::Lobatto, {}});
      if (k >= 2 * s) {
        for (int r = 0; r < kRandomSets; ++r) {
          std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                            static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(k),
                            static_cast<std::uint32_t>(r)};
          std::mt19937_64 rng(seq);
          specs.push_back({k, s, NodeFamily::Custom, random_nodes(k, rng)});
        }
      }
    }
  }
  return specs;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"HBVM Runge-Kutta tableaux: construction, spectral verification and integration", "hbvm"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help and exit");  // -h would clash with --h
  const Streams io{out, err};

  SpecOptions spec_opts;
  std::string out_path;
  std::string tableau_file;
  double tol = 1e-10;

  auto* tableau = app.add_subcommand("tableau", "emit the HBVM(k,s) Butcher tableau as JSON");
  add_spec_options(tableau, spec_opts);
  tableau->add_option("--out", out_path, "output file (default: stdout)");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of A against the Gauss spectrum");
  add_spec_options(spectrum, spec_opts, false);
  spectrum->add_option("--tableau-file", tableau_file, "check a tableau JSON file instead")->check(CLI::ExistingFile);
  spectrum->add_option("--tol", tol, "match tolerance");
  spectrum->add_option("--out", out_path, "output file (default: stdout)");

  int smax = 4, kmax = 10;
  std::uint64_t seed = 42;
  auto* verify = app.add_subcommand("verify", "check every structural identity over a spec matrix");
  verify->add_option("--smax", smax, "largest degree s (<= 6)");
  verify->add_option("--kmax", kmax, "largest stage count k (<= 12)");
  verify->add_option("--tol", tol, "residual tolerance");
  verify->add_option("--seed", seed, "seed for random node sets");
  verify->add_option("--tableau-file", tableau_file, "verify a tableau JSON file instead of the sweep")
      ->check(CLI::ExistingFile);
  verify->add_option("--out", out_path, "report file (default: stdout)");

  std::string problem, mode = "rk", solver = "fixed";
  double h = 0.0, solver_tol = 1e-13, hmax = 0.1, t_end = 0.0;
  int steps = 0, max_iter = 100, levels = 4;
  std::vector<double> y0;
  auto* integrate_cmd = app.add_subcommand("integrate", "integrate a catalog problem, CSV trajectory");
  integrate_cmd->add_option("--problem", problem, "problem name")->required();
  add_spec_options(integrate_cmd, spec_opts);
  integrate_cmd->add_option("--h", h, "step size")->required();
  integrate_cmd->add_option("--steps", steps, "number of steps")->required();
  integrate_cmd->add_option("--mode", mode, "rk (k stages) or gamma (s coefficients)")
      ->check(CLI::IsMember({"rk", "gamma"}));
  integrate_cmd->add_option("--solver", solver, "fixed or newton")->check(CLI::IsMember({"fixed", "newton"}));
  integrate_cmd->add_option("--tol", solver_tol, "stage residual tolerance");
  integrate_cmd->add_option("--max-iter", max_iter, "iterations per step");
  integrate_cmd->add_option("--y0", y0, "initial state, comma-separated (q then p)")->delimiter(',');
  integrate_cmd->add_option("--out", out_path, "CSV file (default: stdout)");

  auto* order = app.add_subcommand("order", "measure the convergence order against a reference solution");
  order->add_option("--problem", problem, "problem name")->required();
  add_spec_options(order, spec_opts);
  order->add_option("--hmax", hmax, "largest step size");
  order->add_option("--levels", levels, "number of halvings (>= 3)");
  order->add_option("--t-end", t_end, "final time (default: problem period)");
  order->add_option("--mode", mode, "rk or gamma")->check(CLI::IsMember({"rk", "gamma"}));
  order->add_option("--out", out_path, "JSON report file");

  auto* stability = app.add_subcommand("stability", "scan |R(z)| on the imaginary axis and left half-plane");
  add_spec_options(stability, spec_opts);
  stability->add_option("--tol", tol, "tolerance on ||R(iy)| - 1|");
  stability->add_option("--out", out_path, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "hbvm: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*tableau) return cmd_tableau(spec_opts, out_path, io);
    if (*spectrum) return cmd_spectrum(spec_opts, tableau_file, tol, out_path, io);
    if (*verify) return cmd_verify(smax, kmax, tol, seed, tableau_file, out_path, io);
    if (*integrate_cmd)
      return cmd_integrate(spec_opts, problem, h, steps, mode, solver, solver_tol, max_iter, y0,
                           out_path, io);
    if (*order) return cmd_order(spec_opts, problem, hmax, levels, t_end, mode, out_path, io);
    if (*stability) return cmd_stability(spec_opts, tol, out_path, io);
  } catch (const UsageError& e) {
    err << "hbvm: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "hbvm: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitUsage;
}

}  // namespace hbvm::cli
