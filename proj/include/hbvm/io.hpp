#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hbvm/integrator.hpp"
#include "hbvm/spectral.hpp"

namespace hbvm {

/// Real formatted with 17 significant digits; non-finite values become "null"
/// in JSON context.
std::string format_real(double x);

struct TableauRecord {
  int k = 0;
  int s = 0;
  NodeFamily family = NodeFamily::Gauss;
  ButcherTableau tableau;
};

/// {"k": int, "s": int, "family": string, "c": [...], "b": [...], "A": [[...]]}
void write_tableau_json(std::ostream& os, const TableauRecord& record);
TableauRecord parse_tableau_json(const std::string& text);
TableauRecord read_tableau_json(const std::string& path);

/// Header `t,y_1,...,y_2m,H,iters`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// JSON array, one object per entry, in the order given.
void write_verification_report(std::ostream& os, const std::vector<VerificationEntry>& entries);

void write_spectrum_report(std::ostream& os, const HbvmSpec& spec, const SpectrumReport& report);

void write_stability_report(std::ostream& os, const HbvmSpec& spec, const StabilityReport& report);

void write_order_report(std::ostream& os, const std::string& problem, const HbvmSpec& spec,
                        const OrderStudy& study);

}  // namespace hbvm
