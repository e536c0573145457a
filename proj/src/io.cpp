#include "hbvm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace hbvm {

namespace {

std::string json_real(double x) { return std::isfinite(x) ? format_real(x) : "null"; }

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << json_real(v(i));
  os << ']';
}

void write_complex(std::ostream& os, Complex z) {
  os << "{\"re\": " << json_real(z.real()) << ", \"im\": " << json_real(z.imag()) << '}';
}

void write_spec(std::ostream& os, const HbvmSpec& spec) {
  os << "{\"k\": " << spec.k << ", \"s\": " << spec.s << ", \"family\": \""
     << to_string(spec.family) << '"';
  if (spec.family == NodeFamily::Custom) {
    os << ", \"nodes\": ";
    write_vector(os, spec.nodes);
  }
  os << '}';
}

Eigen::VectorXd to_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string("tableau JSON: '") + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_tableau_json(std::ostream& os, const TableauRecord& record) {
  const auto& tab = record.tableau;
  os << "{\n  \"k\": " << record.k << ",\n  \"s\": " << record.s << ",\n  \"family\": \""
     << to_string(record.family) << "\",\n  \"c\": ";
  write_vector(os, tab.c);
  os << ",\n  \"b\": ";
  write_vector(os, tab.b);
  os << ",\n  \"A\": [";
  for (Eigen::Index i = 0; i < tab.A.rows(); ++i) {
    os << (i ? ",\n    " : "\n    ");
    write_vector(os, tab.A.row(i).transpose());
  }
  os << "\n  ]\n}\n";
}

TableauRecord parse_tableau_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("tableau JSON: ") + e.what());
  }
  for (const char* key : {"k", "s", "family", "c", "b", "A"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("tableau JSON: missing '") + key + "'");

  TableauRecord r;
  try {
    r.k = j.at("k").get<int>();
    r.s = j.at("s").get<int>();
    r.family = parse_family(j.at("family").get<std::string>());
    r.tableau.c = to_vector(j.at("c"), "c");
    r.tableau.b = to_vector(j.at("b"), "b");
    const auto& rows = j.at("A");
    if (!rows.is_array()) throw std::invalid_argument("tableau JSON: 'A' must be an array of rows");
    r.tableau.A.resize(static_cast<Eigen::Index>(rows.size()), r.k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = to_vector(rows[i], "A");
      if (row.size() != r.k) throw std::invalid_argument("tableau JSON: row length differs from k");
      r.tableau.A.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("tableau JSON: ") + e.what());
  }
  if (r.tableau.c.size() != r.k || r.tableau.b.size() != r.k || r.tableau.A.rows() != r.k)
    throw std::invalid_argument("tableau JSON: sizes of c, b, A must equal k");
  return r;
}

TableauRecord read_tableau_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open tableau file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tableau_json(buf.str());
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index dim = traj.states.empty() ? 0 : traj.states.front().size();
  os << 't';
  for (Eigen::Index i = 1; i <= dim; ++i) os << ",y_" << i;
  os << ",H,iters\n";
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    os << format_real(traj.times[n]);
    for (Eigen::Index i = 0; i < dim; ++i) os << ',' << format_real(traj.states[n](i));
    os << ',' << format_real(traj.energies[n]) << ',' << traj.iteration_counts[n] << '\n';
  }
}

void write_verification_report(std::ostream& os, const std::vector<VerificationEntry>& entries) {
  os << "[";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    os << (i ? ",\n  " : "\n  ") << "{\"spec\": ";
    write_spec(os, e.spec);
    os << ", \"zero_count\": " << e.zero_count
       << ", \"max_match_distance\": " << json_real(e.max_match_distance)
       << ", \"subspace_residual\": " << json_real(e.subspace_residual)
       << ", \"filter_residual\": " << json_real(e.filter_residual) << ", \"wtransform_residuals\": ";
    if (e.wtransform)
      os << '[' << json_real(e.wtransform->orthogonality) << ", "
         << json_real(e.wtransform->similarity) << ']';
    else
      os << "null";
    os << ", \"a_stability_max_deviation\": " << json_real(e.a_stability_max_deviation)
       << ", \"a_stability_max_modulus\": " << json_real(e.a_stability_max_modulus)
       << ", \"passed\": " << (e.passed ? "true" : "false") << '}';
  }
  os << (entries.empty() ? "]\n" : "\n]\n");
}

namespace {

void write_complex_list(std::ostream& os, const ComplexList& values) {
  os << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ", ";
    write_complex(os, values[i]);
  }
  os << ']';
}

}  // namespace

void write_spectrum_report(std::ostream& os, const HbvmSpec& spec, const SpectrumReport& r) {
  os << "{\"spec\": ";
  write_spec(os, spec);
  os << ",\n \"eigenvalues\": ";
  write_complex_list(os, r.eigenvalues);
  os << ",\n \"zero_threshold\": " << json_real(r.zero_threshold)
     << ",\n \"zero_count\": " << r.zero_count << ",\n \"nonzero\": ";
  write_complex_list(os, r.nonzero);
  os << ",\n \"reference\": ";
  write_complex_list(os, r.reference);
  os << ",\n \"max_match_distance\": " << json_real(r.max_match_distance)
     << ",\n \"passed\": " << (r.passed ? "true" : "false") << "}\n";
}

void write_stability_report(std::ostream& os, const HbvmSpec& spec, const StabilityReport& r) {
  os << "{\"spec\": ";
  write_spec(os, spec);
  os << ",\n \"samples\": " << r.samples
     << ",\n \"max_imag_deviation\": " << json_real(r.max_imag_deviation)
     << ",\n \"worst_imag\": {\"z\": ";
  write_complex(os, r.worst_imag.z);
  os << ", \"R\": ";
  write_complex(os, r.worst_imag.R);
  os << "},\n \"max_lhp_modulus\": " << json_real(r.max_lhp_modulus) << ",\n \"worst_lhp\": {\"z\": ";
  write_complex(os, r.worst_lhp.z);
  os << ", \"R\": ";
  write_complex(os, r.worst_lhp.R);
  os << "},\n \"poles\": ";
  write_complex_list(os, r.poles);
  os << "}\n";
}

void write_order_report(std::ostream& os, const std::string& problem, const HbvmSpec& spec,
                        const OrderStudy& study) {
  os << "{\"problem\": \"" << problem << "\", \"spec\": ";
  write_spec(os, spec);
  os << ",\n \"levels\": [";
  for (std::size_t i = 0; i < study.errors.size(); ++i) {
    os << (i ? ",\n   " : "\n   ") << "{\"h\": " << json_real(study.step_sizes[i])
       << ", \"error\": " << json_real(study.errors[i])
       << ", \"used\": " << (study.used[i] ? "true" : "false") << '}';
  }
  os << "\n ],\n \"slope\": " << json_real(study.slope) << "}\n";
}

}  // namespace hbvm
