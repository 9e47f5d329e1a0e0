#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sird/objective.hpp"
#include "sird/optim/problem.hpp"
#include "sird/workbench/config.hpp"

namespace sird::workbench {

/// Everything an objective needs, resolved from a config.
struct Experiment {
  ExperimentConfig config;
  ProblemSetup setup;
  Target target;
  ObjectiveSpec spec;
  /// Carries kinds, bounds and the initial guess.
  ParameterVector initial;
};

/// Builds the target (which may involve a forward solve or reading a file)
/// and resolves population-dependent weights.
Experiment build_experiment(const ExperimentConfig& config);

struct StationaritySummary {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst = 0.0;
  /// Share of time nodes (or 1 for constants) where every variable entry passes.
  double node_pass_fraction = 1.0;
};

struct AlgorithmRun {
  std::string algorithm;
  /// Set when the run threw; the remaining fields are then defaults.
  std::string error;
  double best_value = 0.0;
  std::size_t best_index = 0;
  std::size_t iterations = 0;
  std::string stop_reason;
  std::string message;
  double wall_seconds = 0.0;
  std::size_t value_evaluations = 0;
  std::size_t gradient_evaluations = 0;
  std::vector<double> values;
  std::vector<double> grad_norms;
  Eigen::VectorXd best_x;
  Eigen::VectorXd best_gradient;
  /// 3 x columns at the best iterate.
  Eigen::MatrixXd best_parameters;
  /// At t = 0 for time-dependent parameters.
  double r0 = 0.0;
  Eigen::Vector3d sensitivity = Eigen::Vector3d::Zero();
  StationaritySummary stationarity;
  double max_gamma_plus_m = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<AlgorithmRun> runs;
  std::string version;
  double wall_seconds = 0.0;
};

/// Tolerance used for the stationarity summary of each run.
inline constexpr double kStationarityTol = 1e-3;

/// Runs every configured optimiser (in parallel when threads allow). A
/// failing optimiser is recorded with its error and does not stop the others.
RunRecord run_fit(const Experiment& experiment, std::size_t threads = 0);
RunRecord run_fit(const ExperimentConfig& config, std::size_t threads = 0);

StationaritySummary summarize_stationarity(const StationarityReport& report,
                                           const ParameterVector& prototype);

struct GridAxis {
  int param = kBeta;
  double lo = 0.0;
  double hi = 1.0;
  /// Number of points, endpoints included.
  std::size_t count = 200;

  std::vector<double> points() const;
};

/// Parses name=lo:hi:count, e.g. beta=0:1:200.
GridAxis parse_axis(const std::string& text);

struct GridResult {
  std::vector<GridAxis> axes;
  /// values(i, j) at axes[0] point i and axes[1] point j (one column for a
  /// single axis). Failed evaluations are NaN.
  Eigen::MatrixXd values;
  std::size_t failures = 0;
  std::size_t arg_i = 0;
  std::size_t arg_j = 0;
  double min_value = 0.0;

  double min_at(std::size_t axis) const;
};

/// Dense evaluation of j over one or two constant parameters; others keep
/// their initial values.
GridResult grid_search(const Experiment& experiment, const std::vector<GridAxis>& axes,
                       std::size_t threads = 0);

struct GradientCheck {
  std::vector<double> relative_errors;
  double worst = 0.0;
};

/// Compares the adjoint gradient against central differences at `points`
/// random feasible points (seeded). Constants are checked entry-wise;
/// time-dependent parameters along random directions with the L2 pairing.
GradientCheck check_gradient(const Experiment& experiment, std::size_t points,
                             double step = 1e-6);

/// Writes run.json, one history CSV and one curve CSV per algorithm.
void export_results(const RunRecord& record, const Experiment& experiment,
                    const std::filesystem::path& dir);
/// Writes run.json only.
void save_record(const RunRecord& record, const std::filesystem::path& path);
RunRecord load_record(const std::filesystem::path& path);

/// Curve CSV: t, model S/I/R, target S/I/R and beta/gamma/m on the setup grid.
void write_curve_csv(const std::filesystem::path& path, const Experiment& experiment,
                     const ParameterVector& alpha);
/// History CSV: iteration, value, grad_norm.
void write_history_csv(const std::filesystem::path& path, const AlgorithmRun& run);

void write_grid_csv(const std::filesystem::path& path, const GridResult& grid);

/// Runs a single optimiser and returns the raw result (iterates included).
optim::FitResult fit_one(const Experiment& experiment, const optim::OptimizerConfig& cfg);

}  // namespace sird::workbench
