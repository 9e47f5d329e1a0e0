#include "sird/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sird/errors.hpp"

namespace sird {
namespace {

void require_increasing(const std::vector<double>& nodes, const char* who) {
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw ConfigError(std::string(who) + ": nodes must be strictly increasing");
    }
  }
}

// Interval index i with nodes[i] <= t < nodes[i + 1], clamped to the last one.
std::size_t locate(const std::vector<double>& nodes, double t) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  if (it == nodes.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
  return std::min(i, nodes.size() - 2);
}

}  // namespace

TimeGrid TimeGrid::chebyshev(std::size_t interior, double horizon) {
  if (interior == 0) throw ConfigError("chebyshev_grid: need at least one interior node");
  if (!(horizon > 0.0)) throw ConfigError("chebyshev_grid: horizon must be positive");
  const double n = static_cast<double>(interior);
  std::vector<double> nodes;
  nodes.reserve(interior + 2);
  nodes.push_back(0.0);
  // cos((2i+1)pi/(2N)) written as a sine of a signed argument so that the
  // node set is exactly symmetric about T/2 and the middle node (odd N) is T/2.
  for (std::size_t i = interior; i-- > 0;) {
    const double arg = (n - 1.0 - 2.0 * static_cast<double>(i)) * std::numbers::pi / (2.0 * n);
    const double c = std::sin(arg);
    nodes.push_back(c >= 0.0 ? 0.5 * horizon * (1.0 + c) : horizon - 0.5 * horizon * (1.0 - c));
  }
  nodes.push_back(horizon);
  // Reflect the upper half so t_i + t_{N+1-i} == T holds bitwise.
  const std::size_t m = nodes.size();
  for (std::size_t i = 1; i < m / 2; ++i) nodes[m - 1 - i] = horizon - nodes[i];
  require_increasing(nodes, "chebyshev_grid");
  return TimeGrid(std::move(nodes), GridKind::ChebyshevFirstKindPlusEndpoints);
}

TimeGrid TimeGrid::uniform(std::size_t intervals, double horizon) {
  if (intervals == 0) throw ConfigError("uniform grid: need at least one interval");
  if (!(horizon > 0.0)) throw ConfigError("uniform grid: horizon must be positive");
  std::vector<double> nodes(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    nodes[i] = horizon * static_cast<double>(i) / static_cast<double>(intervals);
  }
  nodes.back() = horizon;
  return TimeGrid(std::move(nodes), GridKind::Uniform);
}

Interpolant Interpolant::cubic_hermite(std::vector<double> nodes, Eigen::MatrixXd values,
                                       Eigen::MatrixXd derivs) {
  if (nodes.size() < 2) throw ConfigError("cubic_hermite: need at least two nodes");
  if (values.cols() != static_cast<Eigen::Index>(nodes.size()) || derivs.cols() != values.cols() ||
      derivs.rows() != values.rows()) {
    throw ConfigError("cubic_hermite: values/derivs must have one column per node");
  }
  require_increasing(nodes, "cubic_hermite");
  Interpolant itp;
  itp.nodes_ = std::move(nodes);
  itp.values_ = std::move(values);
  itp.derivs_ = std::move(derivs);
  itp.mode_ = InterpolationMode::CubicHermite;
  return itp;
}

Interpolant Interpolant::linear(std::vector<double> nodes, Eigen::MatrixXd values) {
  if (nodes.size() < 2) throw ConfigError("linear interpolant: need at least two nodes");
  if (values.cols() != static_cast<Eigen::Index>(nodes.size())) {
    throw ConfigError("linear interpolant: values must have one column per node");
  }
  require_increasing(nodes, "linear interpolant");
  Interpolant itp;
  itp.nodes_ = std::move(nodes);
  itp.values_ = std::move(values);
  itp.mode_ = InterpolationMode::LinearLagrange;
  return itp;
}

Interpolant Interpolant::piecewise_constant(std::vector<double> edges,
                                            Eigen::MatrixXd cell_values) {
  if (edges.size() < 2) throw ConfigError("piecewise_constant: need at least one cell");
  if (cell_values.cols() != static_cast<Eigen::Index>(edges.size()) - 1) {
    throw ConfigError("piecewise_constant: need one column per cell");
  }
  require_increasing(edges, "piecewise_constant");
  Interpolant itp;
  itp.nodes_ = std::move(edges);
  itp.values_ = std::move(cell_values);
  itp.mode_ = InterpolationMode::PiecewiseConstantLeft;
  return itp;
}

void Interpolant::evaluate(double t, Eigen::Ref<Eigen::VectorXd> out) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end() - t_start()));
  if (!(t >= t_start() - slack && t <= t_end() + slack)) {
    std::ostringstream msg;
    msg << "interpolate: t = " << t << " outside [" << t_start() << ", " << t_end() << "]";
    throw std::out_of_range(msg.str());
  }
  t = std::clamp(t, t_start(), t_end());
  const std::size_t i = locate(nodes_, t);
  const auto col = static_cast<Eigen::Index>(i);

  switch (mode_) {
    case InterpolationMode::PiecewiseConstantLeft:
      out = values_.col(col);
      return;
    case InterpolationMode::LinearLagrange: {
      if (t == nodes_[i]) {
        out = values_.col(col);
        return;
      }
      if (t == nodes_[i + 1]) {
        out = values_.col(col + 1);
        return;
      }
      const double s = (t - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
      out = (1.0 - s) * values_.col(col) + s * values_.col(col + 1);
      return;
    }
    case InterpolationMode::CubicHermite: {
      if (t == nodes_[i]) {
        out = values_.col(col);
        return;
      }
      if (t == nodes_[i + 1]) {
        out = values_.col(col + 1);
        return;
      }
      const double h = nodes_[i + 1] - nodes_[i];
      const double s = (t - nodes_[i]) / h;
      const double s2 = s * s;
      const double s3 = s2 * s;
      out = (2.0 * s3 - 3.0 * s2 + 1.0) * values_.col(col) +
            ((s3 - 2.0 * s2 + s) * h) * derivs_.col(col) +
            (-2.0 * s3 + 3.0 * s2) * values_.col(col + 1) + ((s3 - s2) * h) * derivs_.col(col + 1);
      return;
    }
  }
}

Eigen::VectorXd Interpolant::operator()(double t) const {
  Eigen::VectorXd out(dimension());
  evaluate(t, out);
  return out;
}

Eigen::MatrixXd Interpolant::sample(std::span<const double> times) const {
  Eigen::MatrixXd out(dimension(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t j = 0; j < times.size(); ++j) {
    evaluate(times[j], out.col(static_cast<Eigen::Index>(j)));
  }
  return out;
}

Eigen::VectorXd simpson_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  if (n < 3) throw ConfigError("simpson_integrate: need at least 3 nodes");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::size_t i = 0;
  while (i + 1 < n) {
    const double h0 = nodes[i + 1] - nodes[i];
    if (!(h0 > 0.0)) throw ConfigError("simpson_integrate: nodes must be strictly increasing");
    if (i + 2 < n) {
      const double h1 = nodes[i + 2] - nodes[i + 1];
      if (!(h1 > 0.0)) throw ConfigError("simpson_integrate: nodes must be strictly increasing");
      if (h1 <= 2.0 * h0 && h0 <= 2.0 * h1) {
        const double c = (h0 + h1) / 6.0;
        w[i] += c * (2.0 - h1 / h0);
        w[i + 1] += c * (h0 + h1) * (h0 + h1) / (h0 * h1);
        w[i + 2] += c * (2.0 - h0 / h1);
        i += 2;
        continue;
      }
    }
    w[i] += 0.5 * h0;
    w[i + 1] += 0.5 * h0;
    i += 1;
  }
  return w;
}

double simpson_integrate(std::span<const double> nodes, std::span<const double> values) {
  if (values.size() != nodes.size()) {
    throw ConfigError("simpson_integrate: values and nodes differ in length");
  }
  const Eigen::VectorXd w = simpson_weights(nodes);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += w[static_cast<Eigen::Index>(i)] * values[i];
  return sum;
}

Eigen::MatrixXd cell_means(const Interpolant& input, std::span<const double> edges) {
  if (edges.size() < 2) throw ConfigError("cell_means: need at least one cell");
  // Three-point Gauss-Legendre, exact for polynomials of degree <= 5.
  const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto& bp = input.nodes();

  Eigen::MatrixXd means(input.dimension(), static_cast<Eigen::Index>(edges.size() - 1));
  Eigen::VectorXd value(input.dimension());
  for (std::size_t c = 0; c + 1 < edges.size(); ++c) {
    const double a = edges[c];
    const double b = edges[c + 1];
    if (!(b > a)) throw ConfigError("cell_means: edges must be strictly increasing");
    std::vector<double> pieces{a};
    for (auto it = std::upper_bound(bp.begin(), bp.end(), a); it != bp.end() && *it < b; ++it) {
      pieces.push_back(*it);
    }
    pieces.push_back(b);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(input.dimension());
    for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
      const double mid = 0.5 * (pieces[p] + pieces[p + 1]);
      const double half = 0.5 * (pieces[p + 1] - pieces[p]);
      for (int q = 0; q < 3; ++q) {
        input.evaluate(mid + half * gx[q], value);
        acc += (gw[q] * half) * value;
      }
    }
    means.col(static_cast<Eigen::Index>(c)) = acc / (b - a);
  }
  return means;
}

Interpolant rolling_average(const Interpolant& input, std::size_t cells) {
  if (cells == 0) throw ConfigError("rolling_average: need at least one cell");
  const double t0 = input.t_start();
  const double t1 = input.t_end();
  std::vector<double> edges(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    edges[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(cells);
  }
  edges.back() = t1;
  Eigen::MatrixXd means = cell_means(input, edges);
  return Interpolant::piecewise_constant(std::move(edges), std::move(means));
}

}  // namespace sird
