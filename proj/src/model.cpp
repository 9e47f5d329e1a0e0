#include "sird/model.hpp"

#include <cmath>
#include <sstream>

#include "sird/errors.hpp"

namespace sird {

Vec3 state_rhs(const Vec3& rho, const Vec3& alpha) {
  const double infection = alpha[kBeta] * rho[0] * rho[1];
  const double recovery = alpha[kGamma] * rho[1];
  return {-infection, infection - recovery - alpha[kMort] * rho[1], recovery};
}

Eigen::Matrix3d state_jacobian(const Vec3& rho, const Vec3& alpha) {
  const double b = alpha[kBeta], g = alpha[kGamma], m = alpha[kMort];
  Eigen::Matrix3d j;
  j << -b * rho[1], -b * rho[0], 0.0,
       b * rho[1], b * rho[0] - g - m, 0.0,
       0.0, g, 0.0;
  return j;
}

Vec3 adjoint_rhs(const Vec3& q, const Vec3& rho, const Vec3& alpha, const Vec3& drdrho) {
  const double b = alpha[kBeta], g = alpha[kGamma], m = alpha[kMort];
  const double si = q[0] - q[1];
  return {b * rho[1] * si - drdrho[0],
          b * rho[0] * si + g * (q[1] - q[2]) + m * q[1] - drdrho[1],
          -drdrho[2]};
}

StateTrajectory::StateTrajectory(TimeGrid grid, Eigen::Matrix3Xd rho, Eigen::Matrix3Xd rho_dot,
                                 Vec3 rho0, std::shared_ptr<const ode::SolutionPath> path)
    : grid_(std::move(grid)),
      rho_(std::move(rho)),
      rho_dot_(std::move(rho_dot)),
      rho0_(std::move(rho0)),
      path_(std::move(path)) {}

Vec3 StateTrajectory::at(double t) const { return path_->at(t); }

Interpolant StateTrajectory::interpolant() const {
  return Interpolant::cubic_hermite(grid_.nodes(), rho_, rho_dot_);
}

void StateTrajectory::validate(double tol) {
  const double n = population();
  const double limit = tol * n;
  double worst = 0.0;
  std::string what;
  auto note = [&](double excess, const std::string& msg) {
    if (excess > worst) {
      worst = excess;
      what = msg;
    }
  };
  for (Eigen::Index k = 0; k < rho_.cols(); ++k) {
    const double t = grid_[static_cast<std::size_t>(k)];
    std::ostringstream at;
    at << " at t = " << t;
    note(-rho_.col(k).minCoeff(), "negative compartment" + at.str());
    note(rho_.col(k).sum() - n, "total population above n" + at.str());
    if (k > 0) note(rho_.col(k).sum() - rho_.col(k - 1).sum(), "total population increased" + at.str());
  }
  if (worst > 10.0 * limit) {
    throw NumericalError("state invariant violated (" + what + "); tighten solver tolerances",
                         grid_.horizon());
  }
  if (worst > limit) warnings_.push_back(what);
}

StateTrajectory solve_state(const ParameterVector& alpha, const Vec3& rho0, const TimeGrid& grid,
                            const SolverSettings& settings) {
  if (!rho0.allFinite() || rho0.minCoeff() < 0.0) {
    throw ConfigError("initial state must be finite and non-negative");
  }
  if (!(rho0.sum() > 0.0)) throw ConfigError("initial population must be positive");

  ode::IvpProblem problem;
  problem.rhs = [&alpha](double t, const ode::Vector& y, ode::Vector& f) {
    f = state_rhs(y.head<3>(), alpha.at(t));
  };
  problem.y0 = rho0;
  problem.t_start = 0.0;
  problem.t_end = grid.horizon();
  problem.tol = settings.state_tol;
  problem.stops = grid.nodes();

  auto path = std::make_shared<ode::SolutionPath>(ode::integrate(problem));
  Eigen::Matrix3Xd rho = ode::sample(*path, grid.span());
  Eigen::Matrix3Xd rho_dot(3, rho.cols());
  for (Eigen::Index k = 0; k < rho.cols(); ++k) {
    rho_dot.col(k) = state_rhs(rho.col(k), alpha.at(grid[static_cast<std::size_t>(k)]));
  }
  StateTrajectory out(grid, std::move(rho), std::move(rho_dot), rho0, std::move(path));
  // The invariant region only holds for non-negative rates; extrapolated
  // iterates may step outside it.
  if (alpha.values().minCoeff() >= 0.0) out.validate(settings.invariant_tol);
  return out;
}

StateTrajectory solve_state(const ParameterVector& alpha, const Vec3& rho0, double horizon,
                            std::size_t interior, const SolverSettings& settings) {
  return solve_state(alpha, rho0, chebyshev_grid(interior, horizon), settings);
}

AdjointTrajectory solve_adjoint(const StateTrajectory& state, const ParameterVector& alpha,
                                const Interpolant& target, const Vec3& terminal_weights,
                                const SolverSettings& settings) {
  const double T = state.horizon();
  const Vec3 miss_T = state.rho().col(state.rho().cols() - 1) - target(T);

  // pbar(tau) = q(T - tau) satisfies pbar' = J^T pbar + dr/drho.
  ode::IvpProblem problem;
  Eigen::Vector3d rho_hat;
  problem.rhs = [&](double tau, const ode::Vector& y, ode::Vector& f) {
    const double t = std::max(0.0, T - tau);
    const Vec3 rho = state.at(t);
    target.evaluate(t, rho_hat);
    f = -adjoint_rhs(y.head<3>(), rho, alpha.at(t), rho - rho_hat);
  };
  problem.y0 = terminal_weights.cwiseProduct(miss_T);
  problem.t_start = 0.0;
  problem.t_end = T;
  problem.tol = settings.adjoint_tol;
  // Land on every forward step so the sampled state is smooth within steps.
  const auto& forward = state.step_times();
  problem.stops.resize(forward.size());
  for (std::size_t k = 0; k < forward.size(); ++k) problem.stops[k] = T - forward[forward.size() - 1 - k];
  const ode::SolutionPath path = ode::integrate(problem);

  const auto& nodes = state.grid().nodes();
  std::vector<double> taus(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) taus[k] = T - nodes[nodes.size() - 1 - k];
  taus.front() = 0.0;
  taus.back() = T;
  const Eigen::MatrixXd reversed = ode::sample(path, taus);

  AdjointTrajectory out{state.grid(), Eigen::Matrix3Xd(3, reversed.cols())};
  for (Eigen::Index k = 0; k < reversed.cols(); ++k) {
    out.q.col(k) = reversed.col(reversed.cols() - 1 - k);
  }
  return out;
}

}  // namespace sird
