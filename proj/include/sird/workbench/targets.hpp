#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sird/objective.hpp"
#include "sird/workbench/config.hpp"

namespace sird::workbench {

/// Forward solve at alpha_star on the grid, wrapped as the state's cubic
/// Hermite interpolant; the fit at alpha_star is exact by construction.
Target synthesize_known_target(const ParameterVector& alpha_star, const Vec3& rho0,
                               const TimeGrid& grid, const SolverSettings& solver = {});
Target synthesize_known_target(const Vec3& alpha_star, const Vec3& rho0, double horizon,
                               std::size_t interior, const SolverSettings& solver = {});

/// rho2 = rho1 + 4 (sin rho1 - sin rho0) applied per component to the forward
/// solution, then averaged over `cells` uniform cells (piecewise constant).
Target synthesize_noisy_target(const Vec3& alpha_star, const Vec3& rho0, double horizon,
                               std::size_t cells, std::size_t interior = 200,
                               const SolverSettings& solver = {});

/// The sine transform on its own, for a trajectory sampled column-wise.
Eigen::Matrix3Xd sine_transform(const Eigen::Matrix3Xd& rho, const Vec3& rho0);

/// Raw observation table: times and (susceptible, infected, recovered) counts.
struct DataTable {
  std::vector<double> time;
  Eigen::Matrix3Xd counts;
};

struct LoadedTarget {
  Target target;
  double population = 0.0;
  double horizon = 0.0;
  Vec3 rho0 = Vec3::Zero();
};

/// Parses a CSV with a header row; throws ParseError (with the 1-based file
/// row) for malformed rows, non-increasing time or negative counts, and
/// ConfigError for a missing column.
DataTable read_table(std::istream& in, const std::array<std::string, 4>& columns = {
                                           "time", "susceptible", "infected", "recovered"});
DataTable read_table(const std::filesystem::path& path,
                     const std::array<std::string, 4>& columns = {"time", "susceptible",
                                                                  "infected", "recovered"});
void write_table(const std::filesystem::path& path, const DataTable& table);

/// Rescales a table and wraps it as a target. Time starts at the first row.
LoadedTarget table_target(const DataTable& table, double time_scale, double population_scale,
                          const std::string& interpolation = "linear");
LoadedTarget load_csv_target(const TargetConfig& cfg);

/// Time-varying rates used for the synthetic data-driven fixture, defined on
/// the scaled horizon (weeks) over `nodes` uniform nodes.
ParameterVector fixture_parameters(double horizon, std::size_t nodes = 121);

/// Daily rows of a forward solve at fixture_parameters, in persons, for a
/// population of 5.85 million over 60 days, seeded with 40 infected and 60
/// recovered.
DataTable synthesize_fixture_table();

}  // namespace sird::workbench
