#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "experiment.hpp"
#include "fixtures.hpp"

namespace levylmm {
namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "levylmm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  return cells;
}

TEST(Cli, ValidateBundledSetup) {
  const auto r = invoke({"validate"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("lr1_vol_sum"), std::string::npos);
}

TEST(Cli, CompareIsReproducible) {
  const std::vector<std::string> args{"compare", "--paths", "10", "--seed", "1", "--rate", "4"};
  const auto a = invoke(args), b = invoke(args);
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(invoke(threaded).out, a.out);
}

TEST(Cli, ZeroStrikeCapletOnLastRate) {
  const auto r = invoke({"price-caplets", "--strike", "0", "--rate", "9", "--paths", "20000", "--seed", "5"});
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "instrument,maturity_index,swap_end,strike,scheme,price,std_error,n_paths,seed,invalid_paths");
  const auto cells = split(row);
  ASSERT_EQ(cells.size(), 10u);
  const auto& s = test::bundled_setup();
  const double forward = 0.5 * s.curve.bond(10) * s.initial_libor(8);
  EXPECT_NEAR(std::stod(cells[5]), forward, 3 * std::stod(cells[6]));
  EXPECT_EQ(cells[7], "20000");
}

TEST(Cli, PriceSwaption) {
  const auto r = invoke({"price-swaptions", "--option-index", "2", "--swap-end", "6", "--strike", "0.05",
                         "--paths", "2000", "--scheme", "taylor"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("swaption,2,6,"), std::string::npos) << r.out;
}

TEST(Cli, BadArgumentsFail) {
  EXPECT_NE(invoke({}).status, 0);
  EXPECT_NE(invoke({"price-caplets", "--scheme", "euler"}).status, 0);
  EXPECT_NE(invoke({"price-caplets", "--rate", "12", "--paths", "10"}).status, 0);
  EXPECT_NE(invoke({"validate", "--setup", "/nonexistent.json"}).status, 0);
  EXPECT_NE(invoke({"frobnicate"}).status, 0);
}

TEST(Cli, DumpPaths) {
  const auto r = invoke({"dump-paths", "--paths", "2", "--substeps", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 2 * 9 * 10);
}

TEST(Experiment, SurfaceFilesFromComparison) {
  const auto& s = test::bundled_setup();
  const auto table = compare_schemes(caplet_grid(s, {0.9, 1.1}), s, build_grid(s.tenor, 1), 500, 3);
  const std::string dat = caplet_surface_dat(table, Scheme::FrozenDrift);
  EXPECT_EQ(std::count(dat.begin(), dat.end(), '\n') >= 18, true);
  EXPECT_NE(gnuplot_script().find("caplet_frozen.dat"), std::string::npos);
}

}  // namespace
}  // namespace levylmm
