#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "membrane/cli.hpp"
#include "membrane/harness.hpp"

using namespace membrane;
using Catch::Approx;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"membrane-lab"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(p);
  return p;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("semigroup via resolvent basics") {
  EdgeGrid grid = make_grid(StarGraphSpec::finite(2, 1.0), 1500);
  auto provider = stable_graph_provider(grid, {0.5, 0.5});

  EdgeFunctionVec one = EdgeFunctionVec::zeros(grid);
  for (auto& v : one.values) std::fill(v.begin(), v.end(), 1.0);
  EdgeFunctionVec u = semigroup_via_resolvent(provider, 0.7, 4, one);
  for (const auto& v : u.values)
    for (double y : v) REQUIRE(y == Approx(1.0).margin(1e-10));

  REQUIRE_THROWS_AS(semigroup_via_resolvent(provider, 1.0, 3, one), invalid_argument);
}

TEST_CASE("semigroup Cauchy increments shrink") {
  EdgeGrid grid = make_grid(StarGraphSpec::finite(2, 1.0), 1500);
  auto provider = stable_graph_provider(grid, {0.5, 0.5});
  EdgeFunctionVec f = EdgeFunctionVec::zeros(grid);
  for (auto& v : f.values)
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::cos(kPi * grid.point(static_cast<int>(i)));

  const double t = 0.5;
  EdgeFunctionVec u8 = semigroup_via_resolvent(provider, t, 8, f);
  EdgeFunctionVec u16 = semigroup_via_resolvent(provider, t, 16, f);
  EdgeFunctionVec u32 = semigroup_via_resolvent(provider, t, 32, f);
  const double inc1 = sup_distance(u8, u16);
  const double inc2 = sup_distance(u16, u32);
  REQUIRE(inc1 / inc2 >= 1.5);

  // exact reference: f is a Neumann eigenfunction, e^{tA} f = e^{-mu t} f
  const double mu = 0.5 * kPi * kPi;
  double worst = 0.0;
  for (const auto& v : u32.values)
    for (std::size_t i = 0; i < v.size(); ++i)
      worst = std::max(worst, std::abs(v[i] - std::exp(-mu * t) *
                                                   f.values[0][i % f.values[0].size()]));
  REQUIRE(worst <= 0.02);
}

TEST_CASE("semigroup strong continuity at t -> 0") {
  EdgeGrid grid = make_grid(StarGraphSpec::finite(2, 1.0), 4000);
  auto provider = stable_graph_provider(grid, {0.5, 0.5});
  EdgeFunctionVec f = EdgeFunctionVec::zeros(grid);
  for (auto& v : f.values)
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::cos(kPi * grid.point(static_cast<int>(i)));
  EdgeFunctionVec u = semigroup_via_resolvent(provider, 1e-3, 1024, f);
  REQUIRE(sup_distance(u, f) <= 0.01);
}

TEST_CASE("degenerate drift-free ladder sits at quadrature noise") {
  ScenarioConfig sc;
  sc.scenario = Scenario::interval;
  sc.p = 0.7;
  sc.interval_drift = zero_drift();
  SweepSpec sweep;
  sweep.lambdas = {0.5};
  sweep.steps = 3;
  ConvergenceReport report = run_convergence(sc, sweep);
  REQUIRE(report.passed);
  for (const auto& row : report.rows) REQUIRE(row.sup_error <= 1e-6);
}

TEST_CASE("cli: usage and transform") {
  REQUIRE(cli_main(1, std::vector<const char*>{"membrane-lab"}.data()) == 2);
  REQUIRE(run_cli({"transform", "--p", "0.5", "--alpha", "1"}) == 0);
  REQUIRE(run_cli({"no-such-command"}) == 2);
  REQUIRE(run_cli({"converge", "--config", "/nonexistent.json"}) == 2);
}

TEST_CASE("cli converge writes a schema-stable csv and is deterministic") {
  auto dir = temp_dir("membrane_cli_test");
  auto cfg = dir / "converge.json";
  write_file(cfg, R"({
    "scenario": "interval", "r": 1.0, "p": 0.8,
    "drift": {"type": "two_sided_exp", "rate": 4.0, "mass_right": 0.5, "mass_left": 0.5},
    "lambdas": [1.0], "eps0": 0.2, "eps_steps": 3, "pass_threshold": 0.05
  })");

  auto out1 = dir / "out1";
  auto out2 = dir / "out2";
  setenv("MEMBRANE_LAB_THREADS", "1", 1);
  REQUIRE(run_cli({"converge", "--config", cfg.c_str(), "--out", out1.c_str()}) == 0);
  setenv("MEMBRANE_LAB_THREADS", "4", 1);
  REQUIRE(run_cli({"converge", "--config", cfg.c_str(), "--out", out2.c_str()}) == 0);
  setenv("MEMBRANE_LAB_THREADS", "0", 1);

  const std::string csv1 = slurp(out1 / "convergence.csv");
  REQUIRE(csv1 == slurp(out2 / "convergence.csv"));
  REQUIRE(csv1.rfind("scenario,lambda,panel,eps,sup_error,order,monotone,final_ok", 0) == 0);
  REQUIRE(std::filesystem::exists(out1 / "convergence.meta.csv"));
}

TEST_CASE("cli simulate is byte-identical across thread counts") {
  auto dir = temp_dir("membrane_cli_sim");
  auto cfg = dir / "sim.json";
  write_file(cfg, R"({
    "scenario": "finite-graph", "r": 1.0,
    "weights": [0.5, 0.3, 0.2],
    "mc": {"dt": 1e-4, "t": 0.2, "paths": 3000, "seed": 17}
  })");
  auto out1 = dir / "s1";
  auto out2 = dir / "s2";
  setenv("MEMBRANE_LAB_THREADS", "1", 1);
  REQUIRE(run_cli({"simulate", "--config", cfg.c_str(), "--out", out1.c_str()}) == 0);
  setenv("MEMBRANE_LAB_THREADS", "4", 1);
  REQUIRE(run_cli({"simulate", "--config", cfg.c_str(), "--out", out2.c_str()}) == 0);
  setenv("MEMBRANE_LAB_THREADS", "0", 1);
  REQUIRE(slurp(out1 / "occupation.csv") == slurp(out2 / "occupation.csv"));
  REQUIRE(slurp(out1 / "occupation.csv")
              .rfind("name,value,stderr,n_paths,seed", 0) == 0);
}

TEST_CASE("cli solve-sl emits the eigenfunction family") {
  auto dir = temp_dir("membrane_cli_sl");
  auto cfg = dir / "sl.json";
  write_file(cfg, R"({
    "scenario": "interval", "r": 1.0, "p": 0.8,
    "drift": {"type": "fig1"},
    "solve": {"lambda": 1.0, "eps_list": [0.25], "n": 200}
  })");
  auto out = dir / "out";
  REQUIRE(run_cli({"solve-sl", "--config", cfg.c_str(), "--out", out.c_str()}) == 0);
  const std::string csv = slurp(out / "sl_curves.csv");
  REQUIRE(csv.rfind("eps,x,k,k_deriv", 0) == 0);
  REQUIRE(csv.find("\n0.25,") != std::string::npos);
  REQUIRE(csv.find("\n0,") != std::string::npos);  // the limit curve
}

TEST_CASE("csv number formatting is 12 significant digits") {
  REQUIRE(format_number(0.5) == "0.5");
  REQUIRE(format_number(1.0 / 3.0) == "0.333333333333");
  REQUIRE(format_number(123456789012345.0) == "1.23456789012e+14");
}
