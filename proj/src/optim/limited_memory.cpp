#include "sird/optim/limited_memory.hpp"

#include <Eigen/LU>

#include "sird/errors.hpp"

namespace sird::optim {

LimitedMemoryOperator::LimitedMemoryOperator(std::size_t memory, double theta)
    : memory_(memory), theta_(theta) {
  if (memory == 0) throw ConfigError("limited memory size must be positive");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
}

bool LimitedMemoryOperator::push(const Eigen::VectorXd& q, const Eigen::VectorXd& d,
                                 double curvature_eps) {
  const double curvature = q.dot(d);
  if (!(curvature > curvature_eps * q.norm() * d.norm()) || !(curvature > 0.0)) return false;
  steps_.push_back(q);
  grads_.push_back(d);
  if (steps_.size() > memory_) {
    steps_.pop_front();
    grads_.pop_front();
  }
  assemble();
  return true;
}

void LimitedMemoryOperator::clear() {
  steps_.clear();
  grads_.clear();
  w_.resize(0, 0);
  m_.resize(0, 0);
}

void LimitedMemoryOperator::assemble() {
  while (!steps_.empty()) {
    const Eigen::Index m = static_cast<Eigen::Index>(steps_.size());
    const Eigen::Index n = steps_.front().size();
    Eigen::MatrixXd S(n, m), Y(n, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      S.col(i) = steps_[static_cast<std::size_t>(i)];
      Y.col(i) = grads_[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd SY = S.transpose() * Y;
    Eigen::MatrixXd middle = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    middle.topLeftCorner(m, m) = -Eigen::MatrixXd(SY.diagonal().asDiagonal());
    const Eigen::MatrixXd L = SY.triangularView<Eigen::StrictlyLower>();
    middle.topRightCorner(m, m) = L.transpose();
    middle.bottomLeftCorner(m, m) = L;
    middle.bottomRightCorner(m, m) = theta_ * S.transpose() * S;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(middle);
    lu.setThreshold(1e-12);
    if (lu.isInvertible()) {
      w_.resize(n, 2 * m);
      w_ << Y, theta_ * S;
      m_ = lu.inverse();
      return;
    }
    // Singular middle block: forget the oldest pair and try again.
    steps_.pop_front();
    grads_.pop_front();
  }
  w_.resize(0, 0);
  m_.resize(0, 0);
}

Eigen::VectorXd LimitedMemoryOperator::apply(const Eigen::VectorXd& v) const {
  if (steps_.empty()) return theta_ * v;
  return theta_ * v - w_ * (m_ * (w_.transpose() * v));
}

Eigen::MatrixXd LimitedMemoryOperator::dense(std::size_t dimension) const {
  const auto n = static_cast<Eigen::Index>(dimension);
  Eigen::MatrixXd B = theta_ * Eigen::MatrixXd::Identity(n, n);
  if (!steps_.empty()) B -= w_ * m_ * w_.transpose();
  return B;
}

LimitedMemoryOperator compact_update(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y,
                                     double theta) {
  if (S.rows() != Y.rows() || S.cols() != Y.cols()) {
    throw ConfigError("compact_update: S and Y must have the same shape");
  }
  LimitedMemoryOperator op(static_cast<std::size_t>(std::max<Eigen::Index>(1, S.cols())), theta);
  for (Eigen::Index i = 0; i < S.cols(); ++i) op.push(S.col(i), Y.col(i));
  return op;
}

}  // namespace sird::optim
