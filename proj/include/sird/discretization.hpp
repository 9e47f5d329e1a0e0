#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sird {

enum class GridKind { ChebyshevFirstKindPlusEndpoints, Uniform };

/// Strictly increasing time nodes covering [0, T], endpoints included.
class TimeGrid {
 public:
  /// `interior` first-kind Chebyshev points mapped to (0, T), plus 0 and T.
  static TimeGrid chebyshev(std::size_t interior, double horizon);
  /// `intervals` equal cells on [0, T] (intervals + 1 nodes).
  static TimeGrid uniform(std::size_t intervals, double horizon);

  const std::vector<double>& nodes() const { return nodes_; }
  std::span<const double> span() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double horizon() const { return nodes_.back(); }
  GridKind kind() const { return kind_; }
  double operator[](std::size_t i) const { return nodes_[i]; }

 private:
  TimeGrid(std::vector<double> nodes, GridKind kind) : nodes_(std::move(nodes)), kind_(kind) {}

  std::vector<double> nodes_;
  GridKind kind_;
};

inline TimeGrid chebyshev_grid(std::size_t interior, double horizon) {
  return TimeGrid::chebyshev(interior, horizon);
}

enum class InterpolationMode { CubicHermite, LinearLagrange, PiecewiseConstantLeft };

/// Vector-valued interpolant over a strictly increasing node list. Values are
/// stored column-wise (dimension x nodes). For PiecewiseConstantLeft the nodes
/// are cell edges and there is one column per cell; the function takes the
/// cell value on [t_i, t_{i+1}) and the last cell value at the right end.
class Interpolant {
 public:
  Interpolant() = default;

  static Interpolant cubic_hermite(std::vector<double> nodes, Eigen::MatrixXd values,
                                   Eigen::MatrixXd derivs);
  static Interpolant linear(std::vector<double> nodes, Eigen::MatrixXd values);
  static Interpolant piecewise_constant(std::vector<double> edges, Eigen::MatrixXd cell_values);

  InterpolationMode mode() const { return mode_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& derivs() const { return derivs_; }
  Eigen::Index dimension() const { return values_.rows(); }
  double t_start() const { return nodes_.front(); }
  double t_end() const { return nodes_.back(); }

  /// Throws std::out_of_range outside [t_start, t_end].
  void evaluate(double t, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd operator()(double t) const;
  Eigen::MatrixXd sample(std::span<const double> times) const;

 private:
  std::vector<double> nodes_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd derivs_;
  InterpolationMode mode_ = InterpolationMode::LinearLagrange;
};

inline Eigen::VectorXd interpolate(const Interpolant& itp, double t) { return itp(t); }

/// Quadrature weights for the composite Simpson rule on arbitrary increasing
/// nodes. Each consecutive triple contributes the exact integral of its
/// interpolating parabola; a triple whose neighbouring spacings differ by more
/// than a factor of two would receive a negative weight and is replaced by two
/// trapezoids, as is a trailing odd interval. Requires at least 3 nodes.
Eigen::VectorXd simpson_weights(std::span<const double> nodes);

double simpson_integrate(std::span<const double> nodes, std::span<const double> values);

/// Mean of `input` over each cell [edges_i, edges_{i+1}], one column per cell.
/// Exact for the piecewise polynomial interpolants above.
Eigen::MatrixXd cell_means(const Interpolant& input, std::span<const double> edges);

/// Averages `input` over k uniform cells of its domain and returns the
/// right-continuous piecewise constant function of the cell means.
Interpolant rolling_average(const Interpolant& input, std::size_t cells);

}  // namespace sird
