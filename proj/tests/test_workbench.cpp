#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sird/errors.hpp"
#include "sird/workbench/config.hpp"
#include "sird/workbench/run.hpp"
#include "sird/workbench/targets.hpp"

using namespace sird;
using namespace sird::workbench;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = SIRD_SOURCE_DIR;

const char* kSmall = R"({
  "name": "small",
  "rho0": [199, 1, 0],
  "population": 200,
  "horizon": 10,
  "grid": {"interior": 60},
  "parameters": {"initial": [0.05, 0.5, 0.0], "fixed": ["m"]},
  "objective": {"form": "R1", "scale": "n^2"},
  "target": {"source": "known", "alpha": [0.03, 0.6, 0.0]},
  "optimizers": [{"algorithm": "lmbfgs", "stop": {"it_max": 15}, "lmbfgs": {"c": 0.01}},
                 {"algorithm": "fista", "stop": {"it_max": 40}}]
})";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sird_wb_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string parse_error(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_table(in);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped configs load and validate") {
  for (const char* name : {"experiment1.json", "experiment2.json", "experiment3_synthetic.json",
                           "landscape.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(kSource / "configs" / name).validate());
  }
  const auto e1 = load_config(kSource / "configs/experiment1.json");
  CHECK(e1.rho0 == Vec3(199, 1, 0));
  CHECK(e1.optimizers.size() == 4);
  CHECK_FALSE(e1.parameters.fixed[kBeta]);
  CHECK(e1.parameters.fixed[kMort]);
  CHECK(e1.objective.scale_by_population_squared);
}

TEST_CASE("config dump round-trips") {
  const ExperimentConfig c = parse_config(kSmall);
  const std::string once = dump_config(c);
  const ExperimentConfig back = parse_config(once);
  CHECK(dump_config(back) == once);
  CHECK(back.optimizers[0].algorithm == optim::Algorithm::LMBFGS);
  CHECK(back.optimizers[0].stop.it_max == 15);
  CHECK(back.optimizers[0].lmbfgs.c == 0.01);
  CHECK(back.grid_interior == 60);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(R"({"rho0": [1, 0, 0], "bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"rho0": [1, 0, 0], "horizon": 1, "population": 5})").validate(),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"rho0": [1, 0], "horizon": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"rho0": [1, 0, 0], "horizon": 1,
                                   "parameters": {"bounds": {"beta": [0.5, 0.1]}}})")
                      .validate(),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"rho0": [1, 0, 0], "horizon": 1, "optimizers": ["newton"]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK(parse_optimizer(R"({"algorithm": "nmapg", "nmapg": {"mu": 0.5}})").nmapg.mu == 0.5);
}

TEST_CASE("CSV ingestion: constant target, scaling and errors") {
  std::istringstream two("time,susceptible,infected,recovered\n0,100,0,0\n1,100,0,0\n");
  const LoadedTarget flat = table_target(read_table(two), 1.0, 1.0);
  CHECK(flat.population == 100.0);
  CHECK(flat.horizon == 1.0);
  for (double t : {0.0, 0.3, 1.0}) CHECK((flat.target.itp(t) - Eigen::Vector3d(100, 0, 0)).norm() == 0.0);

  std::ostringstream daily;
  daily << "time,susceptible,infected,recovered\n";
  for (int d = 0; d <= 60; ++d) daily << d << "," << 5849900 - 10 * d << ",40," << 60 + 10 * d << "\n";
  std::istringstream din(daily.str());
  const LoadedTarget weeks = table_target(read_table(din), 1.0 / 7.0, 1e-4);
  CHECK(weeks.horizon == doctest::Approx(8.5714).epsilon(1e-4));
  CHECK(weeks.population == doctest::Approx(585.0));
  CHECK(weeks.rho0[1] == doctest::Approx(0.004));

  // Reordered columns are matched by name.
  std::istringstream swapped("infected,time,recovered,susceptible\n1,0,2,3\n1,2,2,3\n");
  CHECK(read_table(swapped).counts(2, 0) == 2.0);

  CHECK(parse_error("time,susceptible,infected,recovered\n0,1,0,0\n1,x,0,0\n").find("row 3") !=
        std::string::npos);
  CHECK(parse_error("time,susceptible,infected,recovered\n0,1,0,0\n0,1,0,0\n").find("row 3") !=
        std::string::npos);
  CHECK(parse_error("time,susceptible,infected,recovered\n0,1,0,0\n1,1,-2,0\n2,1,0,0\n").find("row 3") !=
        std::string::npos);
  CHECK(parse_error("time,susceptible,infected,recovered\n0,1,0\n1,1,0,0\n").find("row 2") !=
        std::string::npos);
  CHECK_FALSE(parse_error("time,susceptible,infected,recovered\n0,1,0,0\n").empty());

  std::istringstream missing("time,susceptible,recovered\n0,1,0\n1,1,0\n");
  try {
    read_table(missing);
    FAIL("expected a missing-column error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("infected") != std::string::npos);
  }
}

TEST_CASE("CSV tables and fitted curves round-trip exactly") {
  const fs::path dir = scratch("csv");
  DataTable t;
  t.time = {0.0, 0.1, 1.0 / 3.0, 2.5};
  t.counts.resize(3, 4);
  t.counts << 1.0 / 7.0, 2e-300, 3.5, 12345.678901234567, 0, 1, M_PI, 4, 1e20, 0.1, 0.2, 0.3;
  write_table(dir / "t.csv", t);
  const DataTable back = read_table(dir / "t.csv");
  CHECK(back.time == t.time);
  CHECK((back.counts - t.counts).norm() == 0.0);

  const Experiment e = build_experiment(parse_config(kSmall));
  const auto alpha = ParameterVector::constant(0.031, 0.58, 0.0);
  write_curve_csv(dir / "curve.csv", e, alpha);
  CHECK(count_lines(dir / "curve.csv") == e.setup.grid.size() + 1);
  const DataTable curve = read_table(dir / "curve.csv", {"t", "S", "I", "R"});
  const auto s = solve_state(alpha, e.setup.rho0, e.setup.grid);
  CHECK(curve.time == e.setup.grid.nodes());
  CHECK((curve.counts - s.rho()).norm() == 0.0);
  const DataTable target = read_table(dir / "curve.csv", {"t", "target_S", "target_I", "target_R"});
  CHECK((target.counts - e.target.itp.sample(e.setup.grid.span())).norm() == 0.0);
}

TEST_CASE("known target: exact fit at its own parameters, constant for a disease-free start") {
  const Vec3 star(0.03, 0.6, 0.0);
  const TimeGrid grid = chebyshev_grid(200, 10.0);
  const Target t = synthesize_known_target(star, Vec3(199, 1, 0), 10.0, 200);
  const double j = evaluate_reduced_cost(ParameterVector::constant(0.03, 0.6, 0.0), t,
                                         ObjectiveSpec::r1(200.0 * 200.0), {Vec3(199, 1, 0), grid, {}});
  CHECK(j <= 1e-10);

  const Target dfe = synthesize_known_target(star, Vec3(200, 0, 0), 10.0, 50);
  for (double s : {0.0, 1.0, 7.3, 10.0}) CHECK((dfe.itp(s) - Eigen::Vector3d(200, 0, 0)).norm() <= 1e-12);
}

TEST_CASE("noisy target: transform fixes the initial state and constants") {
  const Vec3 rho0(380, 20, 0);
  Eigen::Matrix3Xd path(3, 3);
  path << 380, 370, 350, 20, 25, 30, 0, 5, 20;
  const Eigen::Matrix3Xd tr = sine_transform(path, rho0);
  CHECK((tr.col(0) - rho0).norm() == 0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(tr(i, 2) == doctest::Approx(path(i, 2) + 4 * (std::sin(path(i, 2)) - std::sin(rho0[i]))));
  }
  Eigen::Matrix3Xd flat(3, 4);
  flat.colwise() = rho0;
  CHECK((sine_transform(flat, rho0) - flat).norm() == 0.0);

  const Target still = synthesize_noisy_target(Vec3(0.007, 0.1, 0.05), Vec3(400, 0, 0), 3.0, 50, 100);
  for (double s : {0.0, 0.7, 3.0}) CHECK((still.itp(s) - Eigen::Vector3d(400, 0, 0)).norm() <= 1e-9);
  CHECK(still.source == TargetSource::RollingAverage);
}

TEST_CASE("run_fit: empty list, determinism, exports and record round-trip") {
  ExperimentConfig none = parse_config(kSmall);
  none.optimizers.clear();
  const RunRecord empty = run_fit(none, 1);
  CHECK(empty.runs.empty());
  CHECK(empty.config.name == "small");

  const Experiment e = build_experiment(parse_config(kSmall));
  const RunRecord a = run_fit(e, 1);
  const RunRecord b = run_fit(e, 2);
  REQUIRE(a.runs.size() == 2);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].error.empty());
    CHECK(a.runs[i].values == b.runs[i].values);
    CHECK(a.runs[i].best_x == b.runs[i].best_x);
    CHECK(a.runs[i].iterations == b.runs[i].iterations);
  }
  CHECK(a.runs[0].r0 == doctest::Approx(200 * a.runs[0].best_parameters(0, 0) / a.runs[0].best_parameters(1, 0)));

  const fs::path dir = scratch("export");
  export_results(a, e, dir);
  CHECK(fs::exists(dir / "run.json"));
  for (const auto& r : a.runs) {
    CHECK(count_lines(dir / ("history_" + r.algorithm + ".csv")) == r.values.size() + 1);
    CHECK(count_lines(dir / ("curve_" + r.algorithm + ".csv")) == e.setup.grid.size() + 1);
  }

  const RunRecord back = load_record(dir / "run.json");
  CHECK(back.version == a.version);
  CHECK(dump_config(back.config) == dump_config(a.config));
  REQUIRE(back.runs.size() == a.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    const auto &x = a.runs[i], &y = back.runs[i];
    CHECK(y.algorithm == x.algorithm);
    CHECK(y.values == x.values);
    CHECK(y.best_x == x.best_x);
    CHECK(y.best_parameters == x.best_parameters);
    CHECK(y.best_value == x.best_value);
    CHECK(y.stop_reason == x.stop_reason);
    CHECK(y.stationarity.node_pass_fraction == x.stationarity.node_pass_fraction);
    REQUIRE(y.grad_norms.size() == x.grad_norms.size());
    for (std::size_t k = 0; k < x.grad_norms.size(); ++k) {
      CHECK((std::isnan(x.grad_norms[k]) ? std::isnan(y.grad_norms[k]) : y.grad_norms[k] == x.grad_norms[k]));
    }
  }

  AlgorithmRun blank;
  blank.algorithm = "none";
  write_history_csv(dir / "blank.csv", blank);
  CHECK(count_lines(dir / "blank.csv") == 1);
}

TEST_CASE("grid search") {
  const Experiment e = build_experiment(parse_config(kSmall));
  const GridResult one = grid_search(e, {parse_axis("beta=0.02:0.02:1"), parse_axis("gamma=0.7:0.7:1")}, 1);
  auto alpha = ParameterVector::constant(0.02, 0.7, 0.0);
  alpha.fix(kMort);
  const double direct = evaluate_reduced_cost(alpha, e.target, e.spec, e.setup);
  CHECK(one.values.rows() == 1);
  CHECK(one.values.cols() == 1);
  CHECK(one.min_value == doctest::Approx(direct).epsilon(1e-14));

  const GridResult g = grid_search(e, {parse_axis("beta=0:0.06:7"), parse_axis("gamma=0.2:1:5")}, 2);
  CHECK(g.failures == 0);
  CHECK(g.min_at(0) == doctest::Approx(0.03));
  CHECK(g.min_at(1) == doctest::Approx(0.6));
  CHECK(g.min_value <= 1e-10);

  const GridAxis ax = parse_axis("gamma=0:1:200");
  CHECK(ax.param == kGamma);
  CHECK(ax.points().size() == 200);
  CHECK(ax.points().front() == 0.0);
  CHECK(ax.points().back() == 1.0);
  CHECK_THROWS_AS(parse_axis("delta=0:1:3"), ConfigError);
  CHECK_THROWS_AS(parse_axis("beta=0:1"), ConfigError);
}

TEST_CASE("gradient check helper on a small constant problem") {
  ExperimentConfig c = parse_config(kSmall);
  c.grid_interior = 1000;
  const GradientCheck g = check_gradient(build_experiment(c), 4, 1e-6);
  REQUIRE(g.relative_errors.size() == 4);
  CHECK(g.worst <= 1e-4);
}
