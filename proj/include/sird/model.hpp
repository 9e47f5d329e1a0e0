#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sird/discretization.hpp"
#include "sird/ode.hpp"
#include "sird/parameters.hpp"

namespace sird {

using Vec3 = Eigen::Vector3d;

/// f(rho, alpha) = (-b S I, b S I - g I - m I, g I).
Vec3 state_rhs(const Vec3& rho, const Vec3& alpha);
Eigen::Matrix3d state_jacobian(const Vec3& rho, const Vec3& alpha);
/// -J^T q - dr/drho, written out component-wise.
Vec3 adjoint_rhs(const Vec3& q, const Vec3& rho, const Vec3& alpha, const Vec3& drdrho);

struct SolverSettings {
  /// Tighter than the integrator defaults so that adjoint gradients agree
  /// with difference quotients of the discrete cost.
  ode::Tolerances state_tol{1e-8, 1e-10};
  ode::Tolerances adjoint_tol{1e-8, 1e-10};
  /// Invariant check tolerance, relative to the population.
  double invariant_tol = 1e-6;
};

/// Forward solution sampled on a time grid. Immutable once built.
class StateTrajectory {
 public:
  StateTrajectory(TimeGrid grid, Eigen::Matrix3Xd rho, Eigen::Matrix3Xd rho_dot, Vec3 rho0,
                  std::shared_ptr<const ode::SolutionPath> path);

  const TimeGrid& grid() const { return grid_; }
  const Eigen::Matrix3Xd& rho() const { return rho_; }
  const Eigen::Matrix3Xd& rho_dot() const { return rho_dot_; }
  const Vec3& rho0() const { return rho0_; }
  double population() const { return rho0_.sum(); }
  double horizon() const { return grid_.horizon(); }
  /// State at any t in [0, T] from the integrator's own dense output.
  Vec3 at(double t) const;
  /// Cubic Hermite interpolant on the grid nodes.
  Interpolant interpolant() const;
  const ode::StepStats& stats() const { return path_->stats; }
  /// Accepted step times of the forward integration (grid nodes included).
  const std::vector<double>& step_times() const { return path_->nodes; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Checks positivity, total bound and monotone total mass; throws
  /// NumericalError past 10 * tol, records a warning past tol.
  void validate(double tol);

 private:
  TimeGrid grid_;
  Eigen::Matrix3Xd rho_;
  Eigen::Matrix3Xd rho_dot_;
  Vec3 rho0_;
  std::shared_ptr<const ode::SolutionPath> path_;
  std::vector<std::string> warnings_;
};

StateTrajectory solve_state(const ParameterVector& alpha, const Vec3& rho0, const TimeGrid& grid,
                            const SolverSettings& settings = {});
/// Convenience overload on the Chebyshev grid with `interior` inner nodes.
StateTrajectory solve_state(const ParameterVector& alpha, const Vec3& rho0, double horizon,
                            std::size_t interior, const SolverSettings& settings = {});

struct AdjointTrajectory {
  TimeGrid grid;
  Eigen::Matrix3Xd q;

  Vec3 terminal() const { return q.col(q.cols() - 1); }
  /// Lagrange multiplier of the initial condition.
  Vec3 multiplier() const { return q.col(0); }
};

/// Solves q' = -J^T q - (rho - target) backwards from
/// q(T) = terminal_weights .* (rho(T) - target(T)) via tau = T - t.
AdjointTrajectory solve_adjoint(const StateTrajectory& state, const ParameterVector& alpha,
                                const Interpolant& target, const Vec3& terminal_weights,
                                const SolverSettings& settings = {});

}  // namespace sird
