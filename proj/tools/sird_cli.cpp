// Command-line front end: fit, simulate, gen-target, grid, check-grad.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sird/errors.hpp"
#include "sird/model.hpp"
#include "sird/workbench/run.hpp"
#include "sird/workbench/targets.hpp"

using namespace sird;
using namespace sird::workbench;

namespace {

Vec3 parse_triple(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw ConfigError("expected three comma-separated numbers, got '" + text + "'");
    }
  }
  if (v.size() != 3) throw ConfigError("expected three comma-separated numbers, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

void print_table(std::ostream& out, const std::vector<double>& t, const Eigen::MatrixXd& rho) {
  out.precision(12);
  out << "t,S,I,R\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    out << t[k] << ',' << rho(0, c) << ',' << rho(1, c) << ',' << rho(2, c) << '\n';
  }
}

void print_runs(const RunRecord& record) {
  std::printf("%-8s %8s %14s %12s %10s  %s\n", "algo", "iters", "best j", "stationary", "seconds",
              "stop");
  for (const auto& r : record.runs) {
    if (!r.error.empty()) {
      std::printf("%-8s failed: %s\n", r.algorithm.c_str(), r.error.c_str());
      continue;
    }
    std::printf("%-8s %8zu %14.6e %11.1f%% %10.2f  %s\n", r.algorithm.c_str(), r.iterations,
                r.best_value, 100.0 * r.stationarity.node_pass_fraction, r.wall_seconds,
                r.stop_reason.c_str());
    std::printf("         alpha(0) = (%.6g, %.6g, %.6g)  R0 = %.4g\n", r.best_parameters(0, 0),
                r.best_parameters(1, 0), r.best_parameters(2, 0), r.r0);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SIRD parameter identification workbench"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit parameters as described by a config file");
  std::string fit_config, fit_out;
  std::vector<std::string> fit_algos;
  std::size_t threads = 0;
  fit->add_option("--config", fit_config, "Experiment config (JSON)")->required();
  fit->add_option("--algo", fit_algos, "Restrict to these algorithms (repeatable)");
  fit->add_option("--out", fit_out, "Output directory (overrides the config)");
  fit->add_option("--threads", threads, "Worker threads (0 = hardware)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Forward solve with constant rates");
  double beta = 0.0, gamma = 0.0, mort = 0.0, horizon = 1.0;
  double population = 0.0;
  std::string rho0_text, sim_out;
  std::size_t interior = 200;
  sim->add_option("--beta", beta)->required();
  sim->add_option("--gamma", gamma)->required();
  sim->add_option("--m", mort)->required();
  sim->add_option("--T", horizon)->required();
  sim->add_option("--rho0", rho0_text, "s,i,r")->required();
  sim->add_option("--n", population, "Population; checked against the sum of rho0");
  sim->add_option("--grid", interior, "Interior Chebyshev nodes");
  sim->add_option("--out", sim_out, "CSV file (stdout when omitted)");

  // gen-target
  auto* gen = app.add_subcommand("gen-target", "Write a synthetic target as CSV");
  std::string gen_kind, gen_out, gen_config, gen_rho0 = "199,1,0", gen_alpha = "0.03,0.6,0";
  double gen_T = 10.0;
  std::size_t gen_cells = 50;
  gen->add_option("kind", gen_kind, "known, noisy or fixture")
      ->required()
      ->check(CLI::IsMember({"known", "noisy", "fixture"}));
  gen->add_option("--out", gen_out, "CSV file")->required();
  gen->add_option("--config", gen_config, "Take alpha*, rho0, T and cells from a config");
  gen->add_option("--alpha", gen_alpha, "beta,gamma,m");
  gen->add_option("--rho0", gen_rho0, "s,i,r");
  gen->add_option("--T", gen_T);
  gen->add_option("--cells", gen_cells, "Rolling-average cells (noisy)");
  gen->add_option("--grid", interior, "Interior Chebyshev nodes");

  // grid
  auto* grid = app.add_subcommand("grid", "Evaluate j on a parameter grid");
  std::string grid_config, grid_out;
  std::vector<std::string> axes_text;
  grid->add_option("--config", grid_config, "Experiment config (JSON)")->required();
  grid->add_option("--axis", axes_text, "name=lo:hi:count (one or two)")->required();
  grid->add_option("--out", grid_out, "CSV file for the grid values");
  grid->add_option("--threads", threads, "Worker threads (0 = hardware)");

  // check-grad
  auto* check = app.add_subcommand("check-grad", "Compare adjoint and difference gradients");
  std::string check_config;
  std::size_t points = 10;
  double step = 1e-6;
  check->add_option("--config", check_config, "Experiment config (JSON)")->required();
  check->add_option("--points", points, "Random feasible points");
  check->add_option("--step", step, "Central difference step");
  std::size_t check_grid = 0;
  check->add_option("--grid", check_grid, "Interior Chebyshev nodes (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*fit) {
      ExperimentConfig cfg = load_config(fit_config);
      if (!fit_algos.empty()) {
        std::vector<optim::OptimizerConfig> chosen;
        for (const auto& name : fit_algos) {
          const auto algo = optim::parse_algorithm(name);
          bool found = false;
          for (const auto& o : cfg.optimizers) {
            if (o.algorithm == algo) {
              chosen.push_back(o);
              found = true;
            }
          }
          if (!found) {
            optim::OptimizerConfig o;
            o.algorithm = algo;
            chosen.push_back(o);
          }
        }
        cfg.optimizers = chosen;
      }
      if (!fit_out.empty()) cfg.output_dir = fit_out;
      const Experiment experiment = build_experiment(cfg);
      const RunRecord record = run_fit(experiment, threads);
      export_results(record, experiment, cfg.output_dir);
      print_runs(record);
      std::printf("results written to %s\n", cfg.output_dir.string().c_str());
      for (const auto& r : record.runs) {
        if (!r.error.empty()) return 2;
      }
    } else if (*sim) {
      const Vec3 rho0 = parse_triple(rho0_text);
      if (population > 0.0 && std::abs(population - rho0.sum()) > 1e-9 * population) {
        throw ConfigError("--n must equal the sum of --rho0");
      }
      const auto alpha = ParameterVector::constant(beta, gamma, mort);
      if (!alpha.feasible()) throw ConfigError("rates must lie in [0, 1]");
      const StateTrajectory state = solve_state(alpha, rho0, horizon, interior);
      if (sim_out.empty()) {
        print_table(std::cout, state.grid().nodes(), state.rho());
      } else {
        DataTable table{state.grid().nodes(), state.rho()};
        write_table(sim_out, table);
      }
    } else if (*gen) {
      DataTable table;
      if (gen_kind == "fixture") {
        table = synthesize_fixture_table();
      } else {
        Vec3 alpha = parse_triple(gen_alpha);
        Vec3 rho0 = parse_triple(gen_rho0);
        if (!gen_config.empty()) {
          const ExperimentConfig cfg = load_config(gen_config);
          alpha = cfg.target.alpha_star;
          rho0 = cfg.rho0;
          gen_T = cfg.horizon;
          gen_cells = cfg.target.cells;
          interior = cfg.grid_interior;
        }
        const TimeGrid g = chebyshev_grid(interior, gen_T);
        const Target t = gen_kind == "known"
                             ? synthesize_known_target(alpha, rho0, gen_T, interior)
                             : synthesize_noisy_target(alpha, rho0, gen_T, gen_cells, interior);
        table.time = g.nodes();
        table.counts = t.itp.sample(g.span());
      }
      write_table(gen_out, table);
      std::printf("wrote %zu rows to %s\n", table.time.size(), gen_out.c_str());
    } else if (*grid) {
      std::vector<GridAxis> axes;
      for (const auto& a : axes_text) axes.push_back(parse_axis(a));
      const Experiment experiment = build_experiment(load_config(grid_config));
      const GridResult result = grid_search(experiment, axes, threads);
      if (!grid_out.empty()) write_grid_csv(grid_out, result);
      std::printf("minimum j = %.10g at %s = %.6g", result.min_value, param_name(axes[0].param),
                  result.min_at(0));
      if (axes.size() == 2) std::printf(", %s = %.6g", param_name(axes[1].param), result.min_at(1));
      std::printf(" (%zu failed cells)\n", result.failures);
    } else if (*check) {
      ExperimentConfig cfg = load_config(check_config);
      if (check_grid > 0) cfg.grid_interior = check_grid;
      const Experiment experiment = build_experiment(cfg);
      const GradientCheck res = check_gradient(experiment, points, step);
      for (std::size_t i = 0; i < res.relative_errors.size(); ++i) {
        std::printf("point %zu: relative error %.3e\n", i, res.relative_errors[i]);
      }
      std::printf("worst relative error %.3e\n", res.worst);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
