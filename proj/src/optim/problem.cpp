#include "sird/optim/problem.hpp"

#include <cmath>

#include "sird/errors.hpp"

namespace sird::optim {
namespace {

bool same_point(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && a.size() > 0 && (a.array() == b.array()).all();
}

}  // namespace

double CountingProblem::value(const Eigen::VectorXd& x) {
  if (same_point(x, last_x_)) return last_value_;
  last_value_ = inner_.value(x);
  last_x_ = x;
  ++values_;
  return last_value_;
}

double CountingProblem::value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
  if (same_point(x, grad_x_)) {
    grad = last_grad_;
    return grad_value_;
  }
  last_value_ = inner_.value_and_gradient(x, last_grad_);
  grad_value_ = last_value_;
  last_x_ = x;
  grad_x_ = x;
  grad = last_grad_;
  ++values_;
  ++gradients_;
  return last_value_;
}

std::optional<Eigen::VectorXd> CountingProblem::cached_gradient(const Eigen::VectorXd& x) const {
  if (same_point(x, grad_x_)) return last_grad_;
  return std::nullopt;
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None: return "none";
    case StopReason::IterationLimit: return "iteration limit";
    case StopReason::StepTolerance: return "iterate discrepancy below tol_a";
    case StopReason::AbsoluteDecrease: return "absolute objective change below tol_b";
    case StopReason::RelativeDecrease: return "relative objective change below tol_b";
    case StopReason::RadiusCollapse: return "trust-region radius below minimum";
    case StopReason::Stationary: return "projected gradient vanished";
    case StopReason::EvaluationFailure: return "objective evaluation failed";
    case StopReason::BacktrackFailure: return "backtracking limit exceeded";
  }
  return "unknown";
}

void StoppingConfig::validate() const {
  if (it_max == 0) throw ConfigError("it_max must be positive");
  if (!(tol_a >= 0.0) || !(tol_b >= 0.0) || !(tol_pg >= 0.0)) {
    throw ConfigError("stopping tolerances must be non-negative");
  }
}

StopDecision check_stopping(std::size_t k, const Eigen::VectorXd& x_prev,
                            const Eigen::VectorXd& x_next, double j_prev, double j_next,
                            const StoppingConfig& cfg, StopPhase phase, double radius,
                            double radius_min) {
  const double change = std::abs(j_next - j_prev);
  if (change < cfg.tol_b) return {true, StopReason::AbsoluteDecrease};
  if (change < cfg.tol_b * j_prev) return {true, StopReason::RelativeDecrease};
  if (phase == StopPhase::FirstOrder) {
    const double ell = static_cast<double>(x_next.size());
    if ((x_next - x_prev).norm() < cfg.tol_a * std::sqrt(ell)) {
      return {true, StopReason::StepTolerance};
    }
  } else if (radius < radius_min) {
    return {true, StopReason::RadiusCollapse};
  }
  if (k >= cfg.it_max) return {true, StopReason::IterationLimit};
  return {};
}

double projected_gradient_norm(const BoxProblem& problem, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& grad) {
  if (x.size() == 0) return 0.0;
  return (problem.project(x - grad) - x).cwiseAbs().maxCoeff();
}

void FitResult::record(const Eigen::VectorXd& x, double value, double grad_norm) {
  iterates.push_back(x);
  values.push_back(value);
  grad_norms.push_back(grad_norm);
  if (value < best_value || best_x.size() == 0) {
    best_value = value;
    best_x = x;
    best_index = values.size() - 1;
  }
}

}  // namespace sird::optim
