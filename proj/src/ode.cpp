#include "sird/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sird/errors.hpp"

namespace sird::ode {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kA[6][5] = {
    {0.0, 0.0, 0.0, 0.0, 0.0},
    {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0},
    {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0}};
constexpr double kB[6] = {35.0 / 384.0,     0.0, 500.0 / 1113.0, 125.0 / 192.0,
                          -2187.0 / 6784.0, 11.0 / 84.0};
// Difference between the 5th and embedded 4th order weights (7 stages, FSAL).
constexpr double kE[7] = {-71.0 / 57600.0,     0.0,           71.0 / 16695.0, -71.0 / 1920.0,
                          17253.0 / 339200.0, -22.0 / 525.0, 1.0 / 40.0};

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;
constexpr double kErrorExponent = -1.0 / 5.0;  // embedded order 4, plus one

double rms(const Vector& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

bool all_finite(const Vector& v) { return v.allFinite(); }

class Stepper {
 public:
  explicit Stepper(const IvpProblem& p) : p_(p), n_(p.y0.size()) {
    for (auto& k : k_) k.resize(n_);
    tmp_.resize(n_);
  }

  void eval(double t, const Vector& y, Vector& out) {
    p_.rhs(t, y, out);
    ++evaluations;
    if (!all_finite(out)) {
      std::ostringstream msg;
      msg << "right-hand side returned a non-finite value at t = " << t;
      throw NumericalError(msg.str(), t);
    }
  }

  double initial_step(double t0, const Vector& y0, const Vector& f0) {
    const Vector scale = (p_.tol.abs + p_.tol.rel * y0.array().abs()).matrix();
    const double d0 = rms(y0.cwiseQuotient(scale));
    const double d1 = rms(f0.cwiseQuotient(scale));
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    const Vector y1 = y0 + h0 * f0;
    Vector f1(n_);
    eval(t0 + h0, y1, f1);
    const double d2 = rms((f1 - f0).cwiseQuotient(scale)) / h0;
    double h1;
    if (d1 <= 1e-15 && d2 <= 1e-15) {
      h1 = std::max(1e-6, h0 * 1e-3);
    } else {
      h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    }
    return std::min({100.0 * h0, h1, p_.t_end - p_.t_start});
  }

  // One trial step; fills y_new, f_new and returns the weighted RMS error.
  double step(double t, const Vector& y, const Vector& f, double h, Vector& y_new,
              Vector& f_new) {
    k_[0] = f;
    for (int s = 1; s < 6; ++s) {
      tmp_ = y;
      for (int j = 0; j < s; ++j) {
        if (kA[s][j] != 0.0) tmp_.noalias() += (h * kA[s][j]) * k_[j];
      }
      eval(t + kC[s] * h, tmp_, k_[s]);
    }
    y_new = y;
    for (int j = 0; j < 6; ++j) {
      if (kB[j] != 0.0) y_new.noalias() += (h * kB[j]) * k_[j];
    }
    if (!all_finite(y_new)) return std::numeric_limits<double>::infinity();
    eval(t + h, y_new, f_new);
    k_[6] = f_new;

    tmp_.setZero();
    for (int j = 0; j < 7; ++j) {
      if (kE[j] != 0.0) tmp_.noalias() += (h * kE[j]) * k_[j];
    }
    const Vector scale =
        (p_.tol.abs + p_.tol.rel * y.array().abs().max(y_new.array().abs())).matrix();
    return rms(tmp_.cwiseQuotient(scale));
  }

  std::size_t evaluations = 0;

 private:
  const IvpProblem& p_;
  Eigen::Index n_;
  Vector k_[7];
  Vector tmp_;
};

}  // namespace

SolutionPath integrate(const IvpProblem& problem) {
  if (!(problem.t_start < problem.t_end)) {
    throw std::invalid_argument("integrate: t_start must be smaller than t_end");
  }
  if (!(problem.tol.rel > 0.0) || !(problem.tol.abs > 0.0)) {
    throw std::invalid_argument("integrate: tolerances must be positive");
  }
  if (problem.y0.size() == 0 || !problem.y0.allFinite()) {
    throw std::invalid_argument("integrate: initial state must be non-empty and finite");
  }

  const Eigen::Index n = problem.y0.size();
  Stepper stepper(problem);
  SolutionPath path;

  double t = problem.t_start;
  Vector y = problem.y0;
  Vector f(n);
  stepper.eval(t, y, f);
  path.nodes.push_back(t);
  path.values.push_back(y);
  path.derivs.push_back(f);

  double h_abs = stepper.initial_step(t, y, f);
  Vector y_new(n), f_new(n);
  auto next_stop = std::upper_bound(problem.stops.begin(), problem.stops.end(), t);

  while (t < problem.t_end) {
    const double min_step =
        10.0 * std::abs(std::nextafter(t, std::numeric_limits<double>::infinity()) - t);
    bool rejected = false;
    for (;;) {
      if (h_abs < min_step) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t << " (h = " << h_abs << ")";
        throw NumericalError(msg.str(), t);
      }
      while (next_stop != problem.stops.end() && *next_stop <= t) ++next_stop;
      const double barrier =
          next_stop != problem.stops.end() && *next_stop < problem.t_end ? *next_stop : problem.t_end;
      double t_new = t + h_abs;
      // Snap to the barrier when it is reached or only a sliver would remain.
      const bool clipped = t_new >= barrier || barrier - t_new < 1e-3 * h_abs;
      if (clipped) t_new = barrier;
      const double h = t_new - t;
      const double proposed = h_abs;
      h_abs = h;

      const double err = stepper.step(t, y, f, h, y_new, f_new);
      if (err < 1.0) {
        double factor =
            err == 0.0 ? kMaxFactor : std::min(kMaxFactor, kSafety * std::pow(err, kErrorExponent));
        if (rejected) factor = std::min(1.0, factor);
        h_abs *= factor;
        // A step shortened by a stop says little about the next one.
        if (clipped && !rejected) h_abs = std::max(h_abs, proposed);
        t = t_new;
        break;
      }
      const double factor =
          std::isfinite(err) ? std::max(kMinFactor, kSafety * std::pow(err, kErrorExponent))
                             : kMinFactor;
      h_abs *= factor;
      rejected = true;
      ++path.stats.rejected;
    }
    ++path.stats.accepted;
    y.swap(y_new);
    f.swap(f_new);
    path.nodes.push_back(t);
    path.values.push_back(y);
    path.derivs.push_back(f);
  }
  path.stats.rhs_evaluations = stepper.evaluations;
  return path;
}

namespace {

// Index i such that nodes[i] <= t <= nodes[i + 1].
std::size_t locate(const std::vector<double>& nodes, double t) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  if (it == nodes.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
  return std::min(i, nodes.size() - 2);
}

void hermite_into(const SolutionPath& path, double t, Eigen::Ref<Vector> out) {
  const double span = path.t_end() - path.t_start();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (t < path.t_start() - slack || t > path.t_end() + slack || std::isnan(t)) {
    std::ostringstream msg;
    msg << "sample point " << t << " outside [" << path.t_start() << ", " << path.t_end() << "]";
    throw std::out_of_range(msg.str());
  }
  t = std::clamp(t, path.t_start(), path.t_end());
  if (path.nodes.size() == 1) {
    out = path.values.front();
    return;
  }
  const std::size_t i = locate(path.nodes, t);
  const double t0 = path.nodes[i];
  const double t1 = path.nodes[i + 1];
  if (t == t0) {
    out = path.values[i];
    return;
  }
  if (t == t1) {
    out = path.values[i + 1];
    return;
  }
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  out = h00 * path.values[i] + (h10 * h) * path.derivs[i] + h01 * path.values[i + 1] +
        (h11 * h) * path.derivs[i + 1];
}

}  // namespace

Vector SolutionPath::at(double t) const {
  Vector out(dimension());
  hermite_into(*this, t, out);
  return out;
}

Eigen::MatrixXd sample(const SolutionPath& path, std::span<const double> grid) {
  Eigen::MatrixXd out(path.dimension(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    hermite_into(path, grid[j], out.col(static_cast<Eigen::Index>(j)));
  }
  return out;
}

}  // namespace sird::ode
