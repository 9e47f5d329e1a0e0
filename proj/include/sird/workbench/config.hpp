#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sird/objective.hpp"
#include "sird/optim/algorithms.hpp"
#include "sird/parameters.hpp"

namespace sird::workbench {

enum class TargetKind { Known, Noisy, Csv, Zero };

/// Where the fitted data come from.
struct TargetConfig {
  TargetKind kind = TargetKind::Known;
  /// Generating parameters for Known / Noisy.
  Vec3 alpha_star = Vec3::Zero();
  /// Rolling-average cells for Noisy.
  std::size_t cells = 50;

  // Csv only.
  std::filesystem::path path;
  /// Multiplies the time column (e.g. 1/7 for days to weeks).
  double time_scale = 1.0;
  /// Multiplies the counts (e.g. 1e-4 for tens of thousands).
  double population_scale = 1.0;
  /// linear, or hermite for C1 interpolation with finite-difference slopes.
  std::string interpolation = "linear";
  std::array<std::string, 4> columns{"time", "susceptible", "infected", "recovered"};
};

struct ParameterConfig {
  bool time_dependent = false;
  Vec3 initial = Vec3::Zero();
  std::array<bool, 3> fixed{false, false, false};
  std::array<Bounds, 3> bounds{};
};

struct ObjectiveConfig {
  ObjectiveSpec spec;
  /// Divide reg_weights by n^2 before use.
  bool reg_per_population_squared = false;
  /// Use n^2 as the scale, overriding spec.scale.
  bool scale_by_population_squared = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  /// Initial split; n = sum. Ignored for Csv targets, which supply it.
  Vec3 rho0 = Vec3::Zero();
  /// Optional declared population, checked against sum(rho0).
  std::optional<double> population;
  /// Ignored for Csv targets (taken from the last row).
  double horizon = 1.0;
  std::size_t grid_interior = 200;
  bool uniform_grid = false;
  ParameterConfig parameters;
  ObjectiveConfig objective;
  SolverSettings solver;
  TargetConfig target;
  std::vector<optim::OptimizerConfig> optimizers;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// Reads a JSON document; relative CSV paths resolve against the file's folder.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir = {});
std::string dump_config(const ExperimentConfig& cfg);

/// Default optimizer settings for a given algorithm name plus JSON overrides.
optim::OptimizerConfig parse_optimizer(const std::string& json_text);

}  // namespace sird::workbench
