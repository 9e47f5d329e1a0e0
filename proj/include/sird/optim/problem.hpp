#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sird::optim {

/// Smooth objective over a box [lower, upper].
class BoxProblem {
 public:
  virtual ~BoxProblem() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  /// Returns the value and writes the gradient.
  virtual double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const = 0;
  virtual const Eigen::VectorXd& lower() const = 0;
  virtual const Eigen::VectorXd& upper() const = 0;
  /// Positive quadrature weights when the gradient is an L2 density rather
  /// than a Euclidean gradient; the optimisers then work in sqrt(w) .* x.
  virtual const Eigen::VectorXd* metric() const { return nullptr; }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower()).cwiseMin(upper());
  }
};

/// BoxProblem from callables; handy for tests and small experiments.
class FunctionProblem : public BoxProblem {
 public:
  using Value = std::function<double(const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  FunctionProblem(Value f, Gradient g, Eigen::VectorXd lower, Eigen::VectorXd upper)
      : f_(std::move(f)), g_(std::move(g)), lower_(std::move(lower)), upper_(std::move(upper)) {}

  std::size_t dimension() const override { return static_cast<std::size_t>(lower_.size()); }
  double value(const Eigen::VectorXd& x) const override { return f_(x); }
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const override {
    grad = g_(x);
    return f_(x);
  }
  const Eigen::VectorXd& lower() const override { return lower_; }
  const Eigen::VectorXd& upper() const override { return upper_; }

 private:
  Value f_;
  Gradient g_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// Counts evaluations and remembers the most recent value/gradient so that a
/// repeated request at a bitwise-identical point is free.
class CountingProblem {
 public:
  explicit CountingProblem(const BoxProblem& inner) : inner_(inner) {}

  double value(const Eigen::VectorXd& x);
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad);
  /// Gradient at x when it is already known.
  std::optional<Eigen::VectorXd> cached_gradient(const Eigen::VectorXd& x) const;

  const BoxProblem& inner() const { return inner_; }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return inner_.project(x); }
  std::size_t value_count() const { return values_; }
  std::size_t gradient_count() const { return gradients_; }

 private:
  const BoxProblem& inner_;
  std::size_t values_ = 0;
  std::size_t gradients_ = 0;
  Eigen::VectorXd last_x_;
  double last_value_ = 0.0;
  Eigen::VectorXd grad_x_;
  Eigen::VectorXd last_grad_;
  double grad_value_ = 0.0;
};

enum class StopReason {
  None,
  IterationLimit,
  StepTolerance,
  AbsoluteDecrease,
  RelativeDecrease,
  RadiusCollapse,
  Stationary,
  EvaluationFailure,
  BacktrackFailure,
};

const char* to_string(StopReason reason);

struct StoppingConfig {
  std::size_t it_max = 10000;
  /// Iterate discrepancy; compared against tol_a * sqrt(dimension).
  double tol_a = 1e-7;
  /// Himmeblau absolute and relative objective change.
  double tol_b = 5e-13;
  /// Stop when the projected-gradient step |P(x - g) - x|_inf <= tol_pg.
  double tol_pg = 0.0;

  void validate() const;
};

enum class StopPhase { FirstOrder, TrustRegion };

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::None;
};

/// Stopping rules after iteration k (k >= 1 completed iterations). The step
/// test applies to first-order methods; the trust-region phase replaces it by
/// radius < radius_min.
StopDecision check_stopping(std::size_t k, const Eigen::VectorXd& x_prev,
                            const Eigen::VectorXd& x_next, double j_prev, double j_next,
                            const StoppingConfig& cfg, StopPhase phase,
                            double radius = std::numeric_limits<double>::infinity(),
                            double radius_min = 0.0);

/// |P(x - g) - x|_inf, zero exactly at first-order stationary points.
double projected_gradient_norm(const BoxProblem& problem, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& grad);

struct BacktrackRecord {
  std::size_t iteration = 0;
  double lipschitz = 0.0;
  double value = 0.0;      // j(P_L(w))
  double surrogate = 0.0;  // Q_L(P_L(w), w)
};

struct MonitorRecord {
  std::size_t iteration = 0;
  double c_prev = 0.0;
  double j_next = 0.0;
  double c_next = 0.0;
  /// Sufficient-decrease test satisfied by the accepted point.
  bool decrease_ok = false;
  bool corrected = false;
};

struct TrustRegionRecord {
  std::size_t iteration = 0;
  double radius = 0.0;  // after clamping to [delta_min, delta_max]
  double trial_radius = 0.0;
  double ratio = 0.0;
  double decrease = 0.0;
  double required_decrease = 0.0;
  double blend = 0.0;
  bool accepted = false;
};

struct FitResult {
  std::string algorithm;
  Eigen::VectorXd best_x;
  double best_value = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  /// One entry per iterate, starting with the initial point.
  std::vector<Eigen::VectorXd> iterates;
  std::vector<double> values;
  /// |grad|_2 / sqrt(dimension) at the iterate, measured in the problem's
  /// metric; NaN when it was never computed.
  std::vector<double> grad_norms;
  /// Gradient at best_x in the problem's own representation.
  Eigen::VectorXd best_gradient;
  StopReason reason = StopReason::None;
  std::string message;
  double wall_seconds = 0.0;
  std::size_t value_evaluations = 0;
  std::size_t gradient_evaluations = 0;

  std::vector<BacktrackRecord> backtracks;
  std::vector<MonitorRecord> monitor;
  std::vector<TrustRegionRecord> trust_region;
  /// Curvature q^T d of every stored correction pair.
  std::vector<double> stored_curvature;

  std::size_t iterations() const { return values.empty() ? 0 : values.size() - 1; }
  /// Appends an iterate and refreshes the best-so-far fields.
  void record(const Eigen::VectorXd& x, double value, double grad_norm);
};

}  // namespace sird::optim
