#include "sird/objective.hpp"

#include <algorithm>
#include <cmath>

#include "sird/errors.hpp"

namespace sird {
namespace {

bool finite_nonnegative(const Vec3& v) { return v.allFinite() && v.minCoeff() >= 0.0; }

std::array<bool, 3> variable_mask(const ParameterVector& p) {
  return {p.variable(kBeta), p.variable(kGamma), p.variable(kMort)};
}

double regulariser_at(const Vec3& alpha, const Vec3& w, const std::array<bool, 3>& variable) {
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (variable[static_cast<std::size_t>(i)]) r += w[i] * alpha[i] * alpha[i];
  }
  return 0.5 * r;
}

}  // namespace

ObjectiveSpec ObjectiveSpec::r1(double scale) {
  ObjectiveSpec s;
  s.scale = scale;
  return s;
}

ObjectiveSpec ObjectiveSpec::r2(double theta, double scale) {
  ObjectiveSpec s;
  s.form = ObjectiveForm::R2;
  s.reg_weights = Vec3::Constant(theta);
  s.scale = scale;
  return s;
}

ObjectiveSpec ObjectiveSpec::r3(double theta, double vartheta, double scale) {
  ObjectiveSpec s = r2(theta, scale);
  s.form = ObjectiveForm::R3;
  s.terminal_weights = Vec3::Constant(vartheta);
  return s;
}

ObjectiveSpec ObjectiveSpec::data_driven(const Vec3& theta_sq, const Vec3& vartheta_sq,
                                         double upsilon, double scale) {
  ObjectiveSpec s;
  s.form = ObjectiveForm::DataDriven;
  s.reg_weights = theta_sq;
  s.terminal_weights = vartheta_sq;
  s.penalty = upsilon;
  s.scale = scale;
  return s;
}

void ObjectiveSpec::validate() const {
  if (!finite_nonnegative(reg_weights)) throw ConfigError("regularisation weights must be >= 0");
  if (!finite_nonnegative(terminal_weights)) throw ConfigError("terminal weights must be >= 0");
  if (!(std::isfinite(penalty) && penalty >= 0.0)) throw ConfigError("penalty strength must be >= 0");
  if (!(std::isfinite(scale) && scale > 0.0)) throw ConfigError("objective scale must be positive");
}

double penalty_value(const Vec3& alpha, double upsilon) {
  const double excess = std::max(0.0, alpha[kGamma] + alpha[kMort] - 1.0);
  return upsilon * excess * excess;
}

Vec3 penalty_gradient(const Vec3& alpha, double upsilon) {
  const double excess = std::max(0.0, alpha[kGamma] + alpha[kMort] - 1.0);
  return Vec3(0.0, 1.0, 1.0) * (2.0 * upsilon * excess);
}

double running_cost(const Vec3& rho, const Vec3& alpha, const Vec3& target,
                    const ObjectiveSpec& spec, const std::array<bool, 3>& variable) {
  return 0.5 * (rho - target).squaredNorm() + regulariser_at(alpha, spec.reg_weights, variable) +
         penalty_value(alpha, spec.penalty);
}

AdjointTrajectory solve_adjoint(const StateTrajectory& state, const ParameterVector& alpha,
                                const ObjectiveSpec& spec, const Target& target,
                                const SolverSettings& settings) {
  return solve_adjoint(state, alpha, target.itp, spec.terminal_weights, settings);
}

ReducedObjective::ReducedObjective(ParameterVector prototype, Target target, ObjectiveSpec spec,
                                   ProblemSetup setup)
    : prototype_(std::move(prototype)),
      target_(std::move(target)),
      spec_(spec),
      setup_(std::move(setup)) {
  spec_.validate();
  if (target_.itp.dimension() != 3) throw ConfigError("target must have three components");
  const double T = setup_.horizon();
  const double slack = 1e-12 * std::max(1.0, T);
  if (target_.itp.t_start() > slack || target_.itp.t_end() < T - slack) {
    throw ConfigError("target must be defined on all of [0, T]");
  }
  if (prototype_.time_dependent()) {
    const auto& nodes = prototype_.nodes();
    const auto& grid = setup_.grid.nodes();
    bool same = nodes.size() == grid.size();
    for (std::size_t k = 0; same && k < nodes.size(); ++k) {
      same = std::abs(nodes[k] - grid[k]) <= slack;
    }
    if (!same) throw ConfigError("time-dependent parameters must live on the setup grid");
  }
  weights_ = simpson_weights(setup_.grid.span());
  target_nodes_ = target_.itp.sample(setup_.grid.span());
}

ReducedObjective::Evaluation ReducedObjective::evaluate(const ParameterVector& alpha,
                                                        bool with_gradient) const {
  if (alpha.time_dependent() != prototype_.time_dependent() || alpha.columns() != prototype_.columns()) {
    throw ConfigError("parameter layout differs from the objective's prototype");
  }
  const StateTrajectory state = solve_state(alpha, setup_.rho0, setup_.grid, setup_.solver);
  const Eigen::Matrix3Xd& rho = state.rho();
  const Eigen::Index G = rho.cols();
  const auto mask = variable_mask(prototype_);
  const bool td = alpha.time_dependent();

  Evaluation out;
  Eigen::VectorXd pointwise(G);
  for (Eigen::Index k = 0; k < G; ++k) {
    pointwise[k] = 0.5 * (rho.col(k) - target_nodes_.col(k)).squaredNorm();
  }
  out.tracking = weights_.dot(pointwise);
  const Vec3 miss_T = rho.col(G - 1) - target_nodes_.col(G - 1);
  out.terminal = 0.5 * spec_.terminal_weights.dot(miss_T.cwiseProduct(miss_T));

  if (td) {
    Eigen::VectorXd reg(G), pen(G);
    for (Eigen::Index k = 0; k < G; ++k) {
      const Vec3 a = alpha.column(static_cast<std::size_t>(k));
      reg[k] = regulariser_at(a, spec_.reg_weights, mask);
      pen[k] = penalty_value(a, spec_.penalty);
    }
    out.regulariser = weights_.dot(reg);
    out.penalty = weights_.dot(pen);
  } else {
    const Vec3 a = alpha.column(0);
    out.regulariser = regulariser_at(a, spec_.reg_weights, mask);
    out.penalty = setup_.horizon() * penalty_value(a, spec_.penalty);
  }
  out.value = (out.tracking + out.terminal) / spec_.scale + out.regulariser + out.penalty;
  if (!with_gradient) return out;

  const AdjointTrajectory adj = solve_adjoint(state, alpha, target_.itp, spec_.terminal_weights,
                                              setup_.solver);
  // Integrands of the reduced gradient per parameter and node.
  Eigen::Matrix3Xd dens(3, G);
  for (Eigen::Index k = 0; k < G; ++k) {
    const Vec3 r = rho.col(k);
    const Vec3 q = adj.q.col(k);
    dens(kBeta, k) = r[0] * r[1] * (q[1] - q[0]);
    dens(kGamma, k) = r[1] * (q[2] - q[1]);
    dens(kMort, k) = -r[1] * q[1];
  }
  dens /= spec_.scale;

  const auto vars = prototype_.variable_indices();
  const Eigen::Index C = static_cast<Eigen::Index>(alpha.columns());
  out.gradient.resize(static_cast<Eigen::Index>(vars.size()) * C);
  Eigen::Index pos = 0;
  for (int i : vars) {
    if (td) {
      for (Eigen::Index k = 0; k < G; ++k) {
        const Vec3 a = alpha.column(static_cast<std::size_t>(k));
        out.gradient[pos + k] = dens(i, k) + spec_.reg_weights[i] * a[i] +
                                penalty_gradient(a, spec_.penalty)[i];
      }
    } else {
      const Vec3 a = alpha.column(0);
      out.gradient[pos] = weights_.dot(dens.row(i).transpose()) + spec_.reg_weights[i] * a[i] +
                          setup_.horizon() * penalty_gradient(a, spec_.penalty)[i];
    }
    pos += C;
  }
  return out;
}

double ReducedObjective::pairing(const Eigen::VectorXd& g, const Eigen::VectorXd& direction) const {
  if (g.size() != direction.size()) throw ConfigError("pairing: size mismatch");
  if (!prototype_.time_dependent()) return g.dot(direction);
  const Eigen::Index G = weights_.size();
  double sum = 0.0;
  for (Eigen::Index start = 0; start + G <= g.size(); start += G) {
    sum += (weights_.array() * g.segment(start, G).array() * direction.segment(start, G).array()).sum();
  }
  return sum;
}

double evaluate_reduced_cost(const ParameterVector& alpha, const Target& target,
                             const ObjectiveSpec& spec, const ProblemSetup& setup) {
  return ReducedObjective(alpha, target, spec, setup).value(alpha);
}

Eigen::VectorXd reduced_gradient(const ParameterVector& alpha, const Target& target,
                                 const ObjectiveSpec& spec, const ProblemSetup& setup) {
  return ReducedObjective(alpha, target, spec, setup).gradient(alpha);
}

ReducedProblem::ReducedProblem(const ReducedObjective& objective)
    : objective_(objective),
      lower_(objective.prototype().packed_lower()),
      upper_(objective.prototype().packed_upper()) {
  if (objective.prototype().time_dependent()) {
    metric_ = objective.weights().replicate(static_cast<Eigen::Index>(dimension()) / objective.weights().size(), 1);
  }
}

double ReducedProblem::value(const Eigen::VectorXd& x) const {
  return objective_.value(objective_.prototype().unpack(x));
}

double ReducedProblem::value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  auto e = objective_.evaluate(objective_.prototype().unpack(x), true);
  grad = std::move(e.gradient);
  return e.value;
}

StationarityReport check_stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                      double tol, double bound_slack) {
  if (grad.size() != x.size() || lower.size() != x.size() || upper.size() != x.size()) {
    throw ConfigError("check_stationarity: size mismatch");
  }
  StationarityReport rep;
  rep.checked = static_cast<std::size_t>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool at_lo = x[i] <= lower[i] + bound_slack;
    const bool at_hi = x[i] >= upper[i] - bound_slack;
    double excess;
    if (at_lo && at_hi) {
      excess = 0.0;
    } else if (at_lo) {
      excess = -grad[i] - tol;
    } else if (at_hi) {
      excess = grad[i] - tol;
    } else {
      excess = std::abs(grad[i]) - tol;
    }
    if (excess > 0.0) {
      rep.violations.push_back(static_cast<std::size_t>(i));
      rep.worst = std::max(rep.worst, excess + tol);
    }
  }
  return rep;
}

}  // namespace sird
