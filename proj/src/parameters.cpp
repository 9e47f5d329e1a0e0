#include "sird/parameters.hpp"

#include <algorithm>

#include "sird/errors.hpp"

namespace sird {

const char* param_name(int index) {
  static const char* names[3] = {"beta", "gamma", "m"};
  if (index < 0 || index > 2) throw ConfigError("parameter index out of range");
  return names[index];
}

ParameterVector::ParameterVector() : values_(Eigen::MatrixXd::Zero(3, 1)) {}

ParameterVector ParameterVector::constant(double beta, double gamma, double mort) {
  ParameterVector p;
  p.values_ << beta, gamma, mort;
  p.validate();
  return p;
}

ParameterVector ParameterVector::piecewise_linear(std::vector<double> nodes,
                                                  Eigen::MatrixXd values) {
  if (nodes.size() < 2) throw ConfigError("time-dependent parameters need at least two nodes");
  if (values.rows() != 3 || values.cols() != static_cast<Eigen::Index>(nodes.size())) {
    throw ConfigError("time-dependent parameters must be 3 x nodes");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw ConfigError("parameter nodes must be increasing");
  }
  ParameterVector p;
  p.nodes_ = std::move(nodes);
  p.values_ = std::move(values);
  p.validate();
  return p;
}

ParameterVector ParameterVector::on_nodes(std::vector<double> nodes) const {
  if (time_dependent()) throw ConfigError("parameters are already time dependent");
  const Eigen::Index cols = static_cast<Eigen::Index>(nodes.size());
  ParameterVector p = piecewise_linear(std::move(nodes), values_.col(0).replicate(1, cols));
  p.kinds_ = kinds_;
  p.bounds_ = bounds_;
  return p;
}

ParameterVector& ParameterVector::set_kind(int index, ParamKind kind) {
  if (index < 0 || index > 2) throw ConfigError("parameter index out of range");
  kinds_[static_cast<std::size_t>(index)] = kind;
  return *this;
}

ParameterVector& ParameterVector::set_bounds(int index, Bounds b) {
  if (index < 0 || index > 2) throw ConfigError("parameter index out of range");
  if (!(b.lo >= 0.0) || !(b.hi > b.lo)) {
    throw ConfigError(std::string("bounds for ") + param_name(index) + " must satisfy 0 <= lo < hi");
  }
  bounds_[static_cast<std::size_t>(index)] = b;
  return *this;
}

std::vector<int> ParameterVector::variable_indices() const {
  std::vector<int> out;
  for (int i = 0; i < 3; ++i) {
    if (variable(i)) out.push_back(i);
  }
  return out;
}

Eigen::Vector3d ParameterVector::at(double t) const {
  if (!time_dependent()) return values_.col(0);
  if (t <= nodes_.front()) return values_.col(0);
  if (t >= nodes_.back()) return values_.col(values_.cols() - 1);
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  const auto i = static_cast<Eigen::Index>(it - nodes_.begin()) - 1;
  const double t0 = nodes_[static_cast<std::size_t>(i)];
  const double t1 = nodes_[static_cast<std::size_t>(i) + 1];
  const double s = (t - t0) / (t1 - t0);
  return (1.0 - s) * values_.col(i) + s * values_.col(i + 1);
}

std::size_t ParameterVector::packed_size() const {
  return variable_indices().size() * columns();
}

Eigen::VectorXd ParameterVector::pack() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(packed_size()));
  const Eigen::Index c = values_.cols();
  Eigen::Index k = 0;
  for (int i : variable_indices()) {
    x.segment(k, c) = values_.row(i).transpose();
    k += c;
  }
  return x;
}

ParameterVector ParameterVector::unpack(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(packed_size())) {
    throw ConfigError("packed parameter vector has the wrong length");
  }
  ParameterVector p = *this;
  const Eigen::Index c = values_.cols();
  Eigen::Index k = 0;
  for (int i : variable_indices()) {
    p.values_.row(i) = x.segment(k, c).transpose();
    k += c;
  }
  return p;
}

Eigen::VectorXd ParameterVector::packed_lower() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(packed_size()));
  const Eigen::Index c = values_.cols();
  Eigen::Index k = 0;
  for (int i : variable_indices()) {
    x.segment(k, c).setConstant(bounds(i).lo);
    k += c;
  }
  return x;
}

Eigen::VectorXd ParameterVector::packed_upper() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(packed_size()));
  const Eigen::Index c = values_.cols();
  Eigen::Index k = 0;
  for (int i : variable_indices()) {
    x.segment(k, c).setConstant(bounds(i).hi);
    k += c;
  }
  return x;
}

ParameterVector ParameterVector::projected() const {
  ParameterVector p = *this;
  for (int i : variable_indices()) {
    p.values_.row(i) = p.values_.row(i).cwiseMax(bounds(i).lo).cwiseMin(bounds(i).hi);
  }
  return p;
}

bool ParameterVector::feasible(double slack) const {
  for (int i : variable_indices()) {
    if (values_.row(i).minCoeff() < bounds(i).lo - slack) return false;
    if (values_.row(i).maxCoeff() > bounds(i).hi + slack) return false;
  }
  return true;
}

void ParameterVector::validate() const {
  if (!values_.allFinite()) throw ConfigError("parameter values must be finite");
}

double basic_reproduction_number(const Eigen::Vector3d& alpha, double population) {
  const double removal = alpha[kGamma] + alpha[kMort];
  if (removal == 0.0) throw ConfigError("R0 is undefined when gamma + m = 0");
  return population * alpha[kBeta] / removal;
}

Eigen::Vector3d sensitivity_indices(const Eigen::Vector3d& alpha) {
  const double removal = alpha[kGamma] + alpha[kMort];
  if (removal == 0.0) throw ConfigError("sensitivity indices are undefined when gamma + m = 0");
  return {1.0, -alpha[kGamma] / removal, -alpha[kMort] / removal};
}

}  // namespace sird
