#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "hbvm/tableau.hpp"

namespace hbvm::cli {

/// Exit codes shared by every verb.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one CLI invocation (argv[0] is the program name). Machine output goes
/// to the --out file when given, else to `out`; human summaries go to `out`
/// when --out is set and to `err` otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// k strictly increasing nodes in (0,1), one jittered node per cell of width 1/k.
Eigen::VectorXd random_nodes(int k, std::mt19937_64& rng);

/// Specs covered by `verify`: s = 1..smax, k = s..kmax, Gauss, Lobatto
/// (k >= s+1) and three seeded random node sets (k >= 2s), sorted by
/// (s, k, family).
std::vector<HbvmSpec> verify_matrix(int smax, int kmax, std::uint64_t seed);

}  // namespace hbvm::cli
