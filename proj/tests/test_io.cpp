#include <doctest.h>

#include <random>
#include <sstream>

#include "hbvm/io.hpp"
#include "hbvm/problems.hpp"

using namespace hbvm;

TEST_CASE("format_real round-trips doubles") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int n = 0; n < 1000; ++n) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 20);
    CHECK(std::stod(format_real(x)) == x);
  }
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("tableau JSON round-trip is lossless") {
  for (int s = 1; s <= 4; ++s)
    for (int k = s; k <= 8; ++k)
      for (auto f : {NodeFamily::Gauss, NodeFamily::Lobatto}) {
        if (f == NodeFamily::Lobatto && k < std::max(2, s + 1)) continue;
        const TableauRecord rec{k, s, f, hbvm_tableau(HbvmSpec{k, s, f, {}})};
        std::ostringstream os;
        write_tableau_json(os, rec);
        const auto back = parse_tableau_json(os.str());
        CHECK(back.k == k);
        CHECK(back.s == s);
        CHECK(back.family == f);
        CHECK(back.tableau.A == rec.tableau.A);
        CHECK(back.tableau.b == rec.tableau.b);
        CHECK(back.tableau.c == rec.tableau.c);
      }
}

TEST_CASE("tableau JSON: malformed input") {
  CHECK_THROWS_AS(parse_tableau_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_tableau_json(R"({"k": 1, "s": 1, "family": "gauss", "c": [0.5], "b": [1]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_tableau_json(R"({"k": 2, "s": 1, "family": "gauss", "c": [0.5], "b": [1], "A": [[0.5]]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_tableau_json(R"({"k": 1, "s": 1, "family": "radau", "c": [0.5], "b": [1], "A": [[0.5]]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(read_tableau_json("/nonexistent/tableau.json"), std::invalid_argument);
}

TEST_CASE("trajectory CSV layout") {
  const auto& p = find_problem("henon_heiles");
  const auto traj = integrate(hbvm_tableau(HbvmSpec{3, 2, NodeFamily::Gauss, {}}), p.system,
                              p.default_y0, 0.1, 3);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,y_1,y_2,y_3,y_4,H,iters");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == 4);
}

TEST_CASE("verification report marks missing residuals as null") {
  VerificationEntry e;
  e.spec = HbvmSpec{4, 2, NodeFamily::Custom, Eigen::Vector4d(0.15, 0.35, 0.65, 0.85)};
  e.max_match_distance = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  write_verification_report(os, {e});
  const std::string text = os.str();
  CHECK(text.find("\"wtransform_residuals\": null") != std::string::npos);
  CHECK(text.find("\"max_match_distance\": null") != std::string::npos);
  CHECK(text.find("\"nodes\": [0.14999999999999999") != std::string::npos);
  CHECK(text.find("\"passed\": false") != std::string::npos);
}
