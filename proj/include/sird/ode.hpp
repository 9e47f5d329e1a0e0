#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sird::ode {

using Vector = Eigen::VectorXd;

/// Right-hand side y' = f(t, y). The callee writes into `dydt`, which is
/// already sized like `y`.
using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

struct Tolerances {
  double rel = 1e-3;
  double abs = 1e-6;
};

/// Forward initial value problem on [t_start, t_end]. Backward problems are
/// transformed by the caller (tau = T - t) before they reach the integrator.
struct IvpProblem {
  Rhs rhs;
  Vector y0;
  double t_start = 0.0;
  double t_end = 1.0;
  Tolerances tol;
  /// Increasing times the integrator must land on exactly (points outside
  /// the open span are ignored). Used for grid nodes, where piecewise-linear
  /// parameters have kinks and where values are sampled.
  std::vector<double> stops;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

/// Accepted step endpoints of an integration together with the state and the
/// right-hand side at each of them; enough for cubic Hermite dense sampling.
struct SolutionPath {
  std::vector<double> nodes;
  std::vector<Vector> values;
  std::vector<Vector> derivs;
  StepStats stats;

  double t_start() const { return nodes.front(); }
  double t_end() const { return nodes.back(); }
  Eigen::Index dimension() const { return values.front().size(); }

  /// Hermite value at a single time inside the span.
  Vector at(double t) const;
};

/// Dormand-Prince 5(4) with local extrapolation, PI-free step control in the
/// style of the classical RK45 drivers (safety 0.9, factor in [0.2, 10]).
///
/// Throws NumericalError when the step size underflows or the right-hand side
/// produces non-finite values; the error carries the last time reached.
SolutionPath integrate(const IvpProblem& problem);

/// Samples the path on `grid` (each point inside the span). Returns a
/// dimension x grid.size() matrix, one column per grid point. Path nodes are
/// reproduced verbatim; between nodes the cubic Hermite interpolant of the
/// stored values and derivatives is used.
Eigen::MatrixXd sample(const SolutionPath& path, std::span<const double> grid);

}  // namespace sird::ode
