#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sird {

/// Entry order inside every parameter triple.
enum Param : int { kBeta = 0, kGamma = 1, kMort = 2 };

const char* param_name(int index);

enum class ParamKind { Variable, Fixed };

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// The (beta, gamma, m) triple. Either all three entries are constants, or all
/// three are piecewise linear on a shared node list (fixed entries then simply
/// keep their node values). Only Variable entries are exposed to optimisers,
/// packed entry-major: every node of beta, then gamma, then m.
class ParameterVector {
 public:
  ParameterVector();

  static ParameterVector constant(double beta, double gamma, double mort);
  static ParameterVector piecewise_linear(std::vector<double> nodes, Eigen::MatrixXd values);
  /// Lifts a constant vector onto `nodes` (kinds and bounds carried over).
  ParameterVector on_nodes(std::vector<double> nodes) const;

  ParameterVector& set_kind(int index, ParamKind kind);
  ParameterVector& set_bounds(int index, Bounds b);
  ParameterVector& fix(int index) { return set_kind(index, ParamKind::Fixed); }

  bool time_dependent() const { return !nodes_.empty(); }
  const std::vector<double>& nodes() const { return nodes_; }
  /// 3 x 1 for constants, 3 x nodes otherwise.
  const Eigen::MatrixXd& values() const { return values_; }
  ParamKind kind(int index) const { return kinds_[static_cast<std::size_t>(index)]; }
  bool variable(int index) const { return kind(index) == ParamKind::Variable; }
  const Bounds& bounds(int index) const { return bounds_[static_cast<std::size_t>(index)]; }
  std::vector<int> variable_indices() const;

  /// Values at time t (linear interpolation between nodes, clamped at the ends).
  Eigen::Vector3d at(double t) const;
  /// Values at column `k` of the representation (k = 0 for constants).
  Eigen::Vector3d column(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }
  std::size_t columns() const { return static_cast<std::size_t>(values_.cols()); }

  /// Length of the optimisation vector.
  std::size_t packed_size() const;
  Eigen::VectorXd pack() const;
  ParameterVector unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd packed_lower() const;
  Eigen::VectorXd packed_upper() const;

  /// Clips every Variable entry (node-wise) into its bounds.
  ParameterVector projected() const;
  bool feasible(double slack = 0.0) const;

 private:
  void validate() const;

  std::vector<double> nodes_;
  Eigen::MatrixXd values_;
  std::array<ParamKind, 3> kinds_{ParamKind::Variable, ParamKind::Variable, ParamKind::Variable};
  std::array<Bounds, 3> bounds_{};
};

/// n * beta / (gamma + m). Throws ConfigError when gamma + m == 0.
double basic_reproduction_number(const Eigen::Vector3d& alpha, double population);

/// Elasticities of R0 with respect to (beta, gamma, m).
Eigen::Vector3d sensitivity_indices(const Eigen::Vector3d& alpha);

}  // namespace sird
