#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "sird/discretization.hpp"
#include "sird/model.hpp"
#include "sird/optim/problem.hpp"
#include "sird/parameters.hpp"

namespace sird {

enum class ObjectiveForm { R1, R2, R3, DataDriven };

/// Cost = (tracking + terminal) / scale + regulariser + penalty, where
///   tracking   = int 1/2 |rho - target|^2 dt
///   terminal   = 1/2 sum_i terminal_weights_i (rho_i(T) - target_i(T))^2
///   regulariser= 1/2 sum_{i variable} reg_weights_i alpha_i^2
///                (added once for constant parameters, integrated in time otherwise)
///   penalty    = int penalty * max(0, gamma + m - 1)^2 dt.
/// Both weight vectors hold the squared weights of the weighted-norm forms.
struct ObjectiveSpec {
  ObjectiveForm form = ObjectiveForm::R1;
  Vec3 reg_weights = Vec3::Zero();
  Vec3 terminal_weights = Vec3::Zero();
  double penalty = 0.0;
  double scale = 1.0;

  static ObjectiveSpec r1(double scale = 1.0);
  /// theta/2 |alpha_v|^2.
  static ObjectiveSpec r2(double theta, double scale = 1.0);
  /// r2 plus the terminal term vartheta/2 |rho(T) - target(T)|^2.
  static ObjectiveSpec r3(double theta, double vartheta, double scale = 1.0);
  /// 1/2 |theta .* alpha|^2, 1/2 |vartheta .* miss(T)|^2 and the gamma + m penalty,
  /// given the squared weight vectors.
  static ObjectiveSpec data_driven(const Vec3& theta_sq, const Vec3& vartheta_sq, double upsilon,
                                   double scale = 1.0);

  void validate() const;
};

enum class TargetSource { Synthetic, RollingAverage, ExternalData };

struct Target {
  Interpolant itp;
  TargetSource source = TargetSource::Synthetic;
};

struct ProblemSetup {
  Vec3 rho0 = Vec3::Zero();
  TimeGrid grid = chebyshev_grid(200, 1.0);
  SolverSettings solver;

  double population() const { return rho0.sum(); }
  double horizon() const { return grid.horizon(); }
};

/// Pointwise integrand: 1/2 |rho - target|^2 + 1/2 sum w_i alpha_i^2 + H(alpha)
/// with the regulariser restricted to the entries flagged in `variable`.
double running_cost(const Vec3& rho, const Vec3& alpha, const Vec3& target,
                    const ObjectiveSpec& spec, const std::array<bool, 3>& variable = {true, true,
                                                                                       true});

double penalty_value(const Vec3& alpha, double upsilon);
/// d/d(alpha) of the penalty: 2 upsilon max(0, gamma + m - 1) (0, 1, 1).
Vec3 penalty_gradient(const Vec3& alpha, double upsilon);

/// Adjoint for a given objective: terminal condition from its terminal weights.
AdjointTrajectory solve_adjoint(const StateTrajectory& state, const ParameterVector& alpha,
                                const ObjectiveSpec& spec, const Target& target,
                                const SolverSettings& settings = {});

/// Reduced cost j and its adjoint gradient for one target, spec and setup.
/// Parameters supplied to it must share the template's kinds and bounds;
/// time-dependent parameters must live on the setup grid.
class ReducedObjective {
 public:
  ReducedObjective(ParameterVector prototype, Target target, ObjectiveSpec spec,
                   ProblemSetup setup);

  struct Evaluation {
    double value = 0.0;
    double tracking = 0.0;
    double terminal = 0.0;
    double regulariser = 0.0;
    double penalty = 0.0;
    /// Packed like ParameterVector::pack; empty when not requested.
    Eigen::VectorXd gradient;
  };

  Evaluation evaluate(const ParameterVector& alpha, bool with_gradient) const;
  double value(const ParameterVector& alpha) const { return evaluate(alpha, false).value; }
  Eigen::VectorXd gradient(const ParameterVector& alpha) const {
    return evaluate(alpha, true).gradient;
  }

  const ParameterVector& prototype() const { return prototype_; }
  const Target& target() const { return target_; }
  const ObjectiveSpec& spec() const { return spec_; }
  const ProblemSetup& setup() const { return setup_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::Matrix3Xd& target_on_grid() const { return target_nodes_; }

  /// Simpson-weighted inner product matching the gradient representation:
  /// plain dot product for constants, time quadrature per entry otherwise.
  double pairing(const Eigen::VectorXd& g, const Eigen::VectorXd& direction) const;

 private:
  ParameterVector prototype_;
  Target target_;
  ObjectiveSpec spec_;
  ProblemSetup setup_;
  Eigen::VectorXd weights_;
  Eigen::Matrix3Xd target_nodes_;
};

double evaluate_reduced_cost(const ParameterVector& alpha, const Target& target,
                             const ObjectiveSpec& spec, const ProblemSetup& setup);
Eigen::VectorXd reduced_gradient(const ParameterVector& alpha, const Target& target,
                                 const ObjectiveSpec& spec, const ProblemSetup& setup);

inline ParameterVector project(const ParameterVector& alpha) { return alpha.projected(); }

/// Adapts a ReducedObjective to the optimisers' packed box problem.
class ReducedProblem : public optim::BoxProblem {
 public:
  explicit ReducedProblem(const ReducedObjective& objective);

  std::size_t dimension() const override { return static_cast<std::size_t>(lower_.size()); }
  double value(const Eigen::VectorXd& x) const override;
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const override;
  const Eigen::VectorXd& lower() const override { return lower_; }
  const Eigen::VectorXd& upper() const override { return upper_; }
  const Eigen::VectorXd* metric() const override { return metric_.size() ? &metric_ : nullptr; }

  const ReducedObjective& objective() const { return objective_; }

 private:
  const ReducedObjective& objective_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Eigen::VectorXd metric_;
};

struct StationarityReport {
  std::size_t checked = 0;
  std::vector<std::size_t> violations;
  double worst = 0.0;

  bool passed() const { return violations.empty(); }
  double pass_fraction() const {
    return checked == 0 ? 1.0
                        : 1.0 - static_cast<double>(violations.size()) / static_cast<double>(checked);
  }
};

/// First-order conditions of the box problem: interior |g_i| <= tol, at the
/// lower bound g_i >= -tol, at the upper bound g_i <= tol. A coordinate counts
/// as binding when within `bound_slack` of the bound.
StationarityReport check_stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                      double tol, double bound_slack = 1e-12);

}  // namespace sird
