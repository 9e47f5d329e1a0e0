#include "sird/workbench/run.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sird/errors.hpp"
#include "sird/optim/algorithms.hpp"
#include "sird/workbench/targets.hpp"

namespace sird::workbench {
namespace {

using nlohmann::json;
constexpr const char* kVersion = "sird 0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, count) over a small pool; the first exception is
// rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json vector_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Eigen::VectorXd eigen_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from(a[i]);
  return v;
}

std::vector<double> std_from(const json& a) {
  std::vector<double> v;
  v.reserve(a.size());
  for (const auto& x : a) v.push_back(number_from(x));
  return v;
}

ParameterVector with_kinds(const Vec3& values, const ParameterVector& like) {
  auto p = ParameterVector::constant(values[0], values[1], values[2]);
  for (int i = 0; i < 3; ++i) p.set_kind(i, like.kind(i));
  return p;
}

}  // namespace

Experiment build_experiment(const ExperimentConfig& config) {
  config.validate();
  Experiment e;
  e.config = config;
  auto& cfg = e.config;

  std::optional<LoadedTarget> loaded;
  if (cfg.target.kind == TargetKind::Csv) {
    loaded = load_csv_target(cfg.target);
    cfg.rho0 = loaded->rho0;
    cfg.horizon = loaded->horizon;
  }
  e.setup.rho0 = cfg.rho0;
  e.setup.grid = cfg.uniform_grid ? TimeGrid::uniform(cfg.grid_interior + 1, cfg.horizon)
                                  : chebyshev_grid(cfg.grid_interior, cfg.horizon);
  e.setup.solver = cfg.solver;

  const double n = cfg.rho0.sum();
  e.spec = cfg.objective.spec;
  if (cfg.objective.reg_per_population_squared) e.spec.reg_weights /= n * n;
  if (cfg.objective.scale_by_population_squared) e.spec.scale = n * n;

  const Vec3& a0 = cfg.parameters.initial;
  auto initial = ParameterVector::constant(a0[0], a0[1], a0[2]);
  for (int i = 0; i < 3; ++i) {
    const auto k = static_cast<std::size_t>(i);
    initial.set_bounds(i, cfg.parameters.bounds[k]);
    if (cfg.parameters.fixed[k]) initial.fix(i);
  }
  e.initial = cfg.parameters.time_dependent ? initial.on_nodes(e.setup.grid.nodes()) : initial;

  switch (cfg.target.kind) {
    case TargetKind::Known: {
      const Vec3& s = cfg.target.alpha_star;
      e.target = synthesize_known_target(ParameterVector::constant(s[0], s[1], s[2]), cfg.rho0,
                                         e.setup.grid, cfg.solver);
      break;
    }
    case TargetKind::Noisy:
      e.target = synthesize_noisy_target(cfg.target.alpha_star, cfg.rho0, cfg.horizon,
                                         cfg.target.cells, cfg.grid_interior, cfg.solver);
      break;
    case TargetKind::Csv:
      e.target = loaded->target;
      break;
    case TargetKind::Zero:
      e.target = {Interpolant::linear({0.0, cfg.horizon}, Eigen::MatrixXd::Zero(3, 2)),
                  TargetSource::Synthetic};
      break;
  }
  return e;
}

optim::FitResult fit_one(const Experiment& experiment, const optim::OptimizerConfig& cfg) {
  const ReducedObjective objective(experiment.initial, experiment.target, experiment.spec,
                                   experiment.setup);
  const ReducedProblem problem(objective);
  return optim::minimize(problem, experiment.initial.pack(), cfg);
}

StationaritySummary summarize_stationarity(const StationarityReport& report,
                                           const ParameterVector& prototype) {
  StationaritySummary s;
  s.checked = report.checked;
  s.violations = report.violations.size();
  s.worst = report.worst;
  const std::size_t columns = prototype.columns();
  std::vector<bool> bad(columns, false);
  for (std::size_t v : report.violations) bad[v % columns] = true;
  const auto failing = static_cast<double>(std::count(bad.begin(), bad.end(), true));
  s.node_pass_fraction = 1.0 - failing / static_cast<double>(columns);
  return s;
}

namespace {

AlgorithmRun summarize(const Experiment& e, const optim::OptimizerConfig& cfg) {
  AlgorithmRun run;
  run.algorithm = optim::to_string(cfg.algorithm);
  try {
    const ReducedObjective objective(e.initial, e.target, e.spec, e.setup);
    const ReducedProblem problem(objective);
    const optim::FitResult r = optim::minimize(problem, e.initial.pack(), cfg);
    run.best_value = r.best_value;
    run.best_index = r.best_index;
    run.iterations = r.iterations();
    run.stop_reason = optim::to_string(r.reason);
    run.message = r.message;
    run.wall_seconds = r.wall_seconds;
    run.value_evaluations = r.value_evaluations;
    run.gradient_evaluations = r.gradient_evaluations;
    run.values = r.values;
    run.grad_norms = r.grad_norms;
    run.best_x = r.best_x;
    run.best_gradient = r.best_gradient;

    const ParameterVector best = e.initial.unpack(r.best_x);
    run.best_parameters = best.values();
    const Vec3 a = best.column(0);
    try {
      run.r0 = basic_reproduction_number(a, e.setup.population());
      run.sensitivity = sensitivity_indices(a);
    } catch (const ConfigError&) {
      run.r0 = kNaN;
      run.sensitivity.setConstant(kNaN);
    }
    for (std::size_t k = 0; k < best.columns(); ++k) {
      run.max_gamma_plus_m = std::max(run.max_gamma_plus_m, best.column(k)[kGamma] + best.column(k)[kMort]);
    }
    if (r.best_gradient.size() == r.best_x.size()) {
      const auto report = check_stationarity(r.best_x, r.best_gradient, problem.lower(),
                                             problem.upper(), kStationarityTol);
      run.stationarity = summarize_stationarity(report, e.initial);
    }
  } catch (const std::exception& ex) {
    run.error = ex.what();
  }
  return run;
}

}  // namespace

RunRecord run_fit(const Experiment& experiment, std::size_t threads) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.config = experiment.config;
  record.version = kVersion;
  record.runs.resize(experiment.config.optimizers.size());
  parallel_for(record.runs.size(), threads, [&](std::size_t i) {
    record.runs[i] = summarize(experiment, experiment.config.optimizers[i]);
  });
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

RunRecord run_fit(const ExperimentConfig& config, std::size_t threads) {
  return run_fit(build_experiment(config), threads);
}

std::vector<double> GridAxis::points() const {
  std::vector<double> p(count);
  for (std::size_t i = 0; i < count; ++i) {
    p[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  if (count > 1) p.back() = hi;
  return p;
}

GridAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("axis must look like beta=0:1:200");
  GridAxis axis;
  const std::string name = text.substr(0, eq);
  axis.param = -1;
  for (int i = 0; i < 3; ++i) {
    if (name == param_name(i)) axis.param = i;
  }
  if (axis.param < 0) throw ConfigError("unknown axis parameter '" + name + "'");
  std::stringstream ss(text.substr(eq + 1));
  std::string lo, hi, count;
  if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') || !std::getline(ss, count)) {
    throw ConfigError("axis must look like beta=0:1:200");
  }
  try {
    axis.lo = std::stod(lo);
    axis.hi = std::stod(hi);
    const long c = std::stol(count);
    if (c < 1) throw ConfigError("axis needs at least one point");
    axis.count = static_cast<std::size_t>(c);
  } catch (const std::logic_error&) {
    throw ConfigError("axis must look like beta=0:1:200");
  }
  if (!(axis.lo >= 0.0 && axis.lo <= axis.hi)) throw ConfigError("axis range must satisfy 0 <= lo <= hi");
  return axis;
}

double GridResult::min_at(std::size_t axis) const {
  return axes.at(axis).points()[axis == 0 ? arg_i : arg_j];
}

GridResult grid_search(const Experiment& experiment, const std::vector<GridAxis>& axes,
                       std::size_t threads) {
  if (axes.empty() || axes.size() > 2) throw ConfigError("grid search takes one or two axes");
  if (experiment.initial.time_dependent()) {
    throw ConfigError("grid search needs constant parameters");
  }
  if (axes.size() == 2 && axes[0].param == axes[1].param) {
    throw ConfigError("grid axes must differ");
  }
  GridResult out;
  out.axes = axes;
  const auto p0 = axes[0].points();
  const auto p1 = axes.size() == 2 ? axes[1].points() : std::vector<double>{0.0};
  out.values.resize(static_cast<Eigen::Index>(p0.size()), static_cast<Eigen::Index>(p1.size()));

  const ReducedObjective objective(experiment.initial, experiment.target, experiment.spec,
                                   experiment.setup);
  const Vec3 base = experiment.initial.column(0);
  std::atomic<std::size_t> failures{0};
  parallel_for(p0.size() * p1.size(), threads, [&](std::size_t flat) {
    const std::size_t i = flat / p1.size();
    const std::size_t j = flat % p1.size();
    Vec3 a = base;
    a[axes[0].param] = p0[i];
    if (axes.size() == 2) a[axes[1].param] = p1[j];
    double v = kNaN;
    try {
      v = objective.value(with_kinds(a, experiment.initial));
    } catch (const NumericalError&) {
      ++failures;
    }
    out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
  });
  out.failures = failures;

  out.min_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
      const double v = out.values(i, j);
      if (v < out.min_value) {
        out.min_value = v;
        out.arg_i = static_cast<std::size_t>(i);
        out.arg_j = static_cast<std::size_t>(j);
      }
    }
  }
  return out;
}

GradientCheck check_gradient(const Experiment& experiment, std::size_t points, double step) {
  if (!(step > 0.0)) throw ConfigError("difference step must be positive");
  const ReducedObjective objective(experiment.initial, experiment.target, experiment.spec,
                                   experiment.setup);
  const ReducedProblem problem(objective);
  const Eigen::VectorXd lo = problem.lower();
  const Eigen::VectorXd hi = problem.upper();
  const Eigen::VectorXd width = hi - lo;
  const bool td = experiment.initial.time_dependent();

  std::mt19937_64 rng(experiment.config.seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Time-dependent points and directions are smooth profiles (a level plus
  // three sine modes); the density pairing approximates the discrete
  // derivative only for functions resolved by the grid.
  const auto& nodes = experiment.setup.grid.nodes();
  const double T = experiment.setup.horizon();
  const auto G = static_cast<Eigen::Index>(nodes.size());
  auto smooth = [&](Eigen::VectorXd& v, double level_lo, double level_hi, double amp) {
    std::uniform_real_distribution<double> level(level_lo, level_hi);
    for (Eigen::Index b = 0; b < v.size() / G; ++b) {
      const double c0 = level(rng);
      double c[3];
      for (double& ck : c) ck = amp * normal(rng);
      for (Eigen::Index k = 0; k < G; ++k) {
        double f = c0;
        for (int m = 0; m < 3; ++m) f += c[m] * std::sin((m + 1) * 3.141592653589793 * nodes[static_cast<std::size_t>(k)] / T);
        v[b * G + k] = f;
      }
    }
  };

  GradientCheck out;
  for (std::size_t p = 0; p < points; ++p) {
    Eigen::VectorXd x(lo.size());
    if (td) {
      smooth(x, 0.2, 0.8, 0.05);
      x = lo + width.cwiseProduct(x.cwiseMax(0.05).cwiseMin(0.95));
    } else {
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lo[i] + unit(rng) * width[i];
    }
    Eigen::VectorXd g;
    problem.value_and_gradient(x, g);
    double err = 0.0;
    if (!td) {
      Eigen::VectorXd fd(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x[i]));
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd[i] = (problem.value(xp) - problem.value(xm)) / (2.0 * h);
      }
      err = (g - fd).norm() / std::max(fd.norm(), 1e-300);
    } else {
      Eigen::VectorXd d(x.size());
      smooth(d, -1.0, 1.0, 0.5);
      d = d.cwiseProduct(width);
      const double fd = (problem.value(x + step * d) - problem.value(x - step * d)) / (2.0 * step);
      const double an = objective.pairing(g, d);
      err = std::abs(an - fd) / std::max(std::abs(fd), 1e-300);
    }
    out.relative_errors.push_back(err);
    out.worst = std::max(out.worst, err);
  }
  return out;
}

void write_curve_csv(const std::filesystem::path& path, const Experiment& e,
                     const ParameterVector& alpha) {
  const StateTrajectory state = solve_state(alpha, e.setup.rho0, e.setup.grid, e.setup.solver);
  const Eigen::MatrixXd target = e.target.itp.sample(e.setup.grid.span());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "t,S,I,R,target_S,target_I,target_R,beta,gamma,m\n";
  for (std::size_t k = 0; k < e.setup.grid.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    const Vec3 a = alpha.at(e.setup.grid[k]);
    out << format(e.setup.grid[k]);
    for (int i = 0; i < 3; ++i) out << ',' << format(state.rho()(i, c));
    for (int i = 0; i < 3; ++i) out << ',' << format(target(i, c));
    for (int i = 0; i < 3; ++i) out << ',' << format(a[i]);
    out << '\n';
  }
}

void write_history_csv(const std::filesystem::path& path, const AlgorithmRun& run) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "iteration,value,grad_norm\n";
  for (std::size_t k = 0; k < run.values.size(); ++k) {
    const double gn = k < run.grad_norms.size() ? run.grad_norms[k] : kNaN;
    out << k << ',' << format(run.values[k]) << ',' << format(gn) << '\n';
  }
}

void write_grid_csv(const std::filesystem::path& path, const GridResult& grid) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  const auto p0 = grid.axes[0].points();
  const bool two = grid.axes.size() == 2;
  const auto p1 = two ? grid.axes[1].points() : std::vector<double>{};
  out << param_name(grid.axes[0].param);
  if (two) out << ',' << param_name(grid.axes[1].param);
  out << ",j\n";
  for (std::size_t i = 0; i < p0.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      out << format(p0[i]);
      if (two) out << ',' << format(p1[static_cast<std::size_t>(j)]);
      out << ',' << format(grid.values(static_cast<Eigen::Index>(i), j)) << '\n';
    }
  }
}

namespace {

json run_json(const AlgorithmRun& r) {
  json params = json::array();
  for (Eigen::Index i = 0; i < r.best_parameters.rows(); ++i) {
    params.push_back(vector_json(Eigen::VectorXd(r.best_parameters.row(i).transpose())));
  }
  return {
      {"algorithm", r.algorithm},
      {"error", r.error},
      {"best_value", number(r.best_value)},
      {"best_index", r.best_index},
      {"iterations", r.iterations},
      {"stop_reason", r.stop_reason},
      {"message", r.message},
      {"wall_seconds", r.wall_seconds},
      {"value_evaluations", r.value_evaluations},
      {"gradient_evaluations", r.gradient_evaluations},
      {"values", vector_json(r.values)},
      {"grad_norms", vector_json(r.grad_norms)},
      {"best_x", vector_json(r.best_x)},
      {"best_gradient", vector_json(r.best_gradient)},
      {"best_parameters", params},
      {"r0", number(r.r0)},
      {"sensitivity", vector_json(Eigen::VectorXd(r.sensitivity))},
      {"stationarity",
       {{"tolerance", kStationarityTol},
        {"checked", r.stationarity.checked},
        {"violations", r.stationarity.violations},
        {"worst", number(r.stationarity.worst)},
        {"node_pass_fraction", number(r.stationarity.node_pass_fraction)}}},
      {"max_gamma_plus_m", number(r.max_gamma_plus_m)},
      {"plot", {{"x", "iteration"}, {"y", "value"}, {"y_scale", "log"}}},
  };
}

AlgorithmRun run_from(const json& j) {
  AlgorithmRun r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.best_value = number_from(j.at("best_value"));
  r.best_index = j.at("best_index").get<std::size_t>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  r.message = j.at("message").get<std::string>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.value_evaluations = j.at("value_evaluations").get<std::size_t>();
  r.gradient_evaluations = j.at("gradient_evaluations").get<std::size_t>();
  r.values = std_from(j.at("values"));
  r.grad_norms = std_from(j.at("grad_norms"));
  r.best_x = eigen_from(j.at("best_x"));
  r.best_gradient = eigen_from(j.at("best_gradient"));
  const auto& params = j.at("best_parameters");
  if (!params.empty()) {
    r.best_parameters.resize(static_cast<Eigen::Index>(params.size()),
                             static_cast<Eigen::Index>(params[0].size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
      r.best_parameters.row(static_cast<Eigen::Index>(i)) = eigen_from(params[i]).transpose();
    }
  }
  r.r0 = number_from(j.at("r0"));
  r.sensitivity = eigen_from(j.at("sensitivity"));
  const auto& s = j.at("stationarity");
  r.stationarity.checked = s.at("checked").get<std::size_t>();
  r.stationarity.violations = s.at("violations").get<std::size_t>();
  r.stationarity.worst = number_from(s.at("worst"));
  r.stationarity.node_pass_fraction = number_from(s.at("node_pass_fraction"));
  r.max_gamma_plus_m = number_from(j.at("max_gamma_plus_m"));
  return r;
}

}  // namespace

void save_record(const RunRecord& record, const std::filesystem::path& path) {
  json runs = json::array();
  for (const auto& r : record.runs) runs.push_back(run_json(r));
  const json doc = {{"version", record.version},
                    {"wall_seconds", record.wall_seconds},
                    {"config", json::parse(dump_config(record.config))},
                    {"runs", runs}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

RunRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run record is not valid JSON: ") + e.what());
  }
  RunRecord record;
  try {
    record.version = doc.at("version").get<std::string>();
    record.wall_seconds = doc.at("wall_seconds").get<double>();
    record.config = parse_config(doc.at("config").dump());
    for (const auto& r : doc.at("runs")) record.runs.push_back(run_from(r));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  }
  return record;
}

void export_results(const RunRecord& record, const Experiment& experiment,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_record(record, dir / "run.json");
  for (const auto& r : record.runs) {
    write_history_csv(dir / ("history_" + r.algorithm + ".csv"), r);
    if (r.error.empty() && r.best_x.size() > 0) {
      write_curve_csv(dir / ("curve_" + r.algorithm + ".csv"), experiment,
                      experiment.initial.unpack(r.best_x));
    }
  }
}

}  // namespace sird::workbench
