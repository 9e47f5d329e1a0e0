#pragma once

#include <cstddef>
#include <deque>

#include <Eigen/Core>

namespace sird::optim {

/// Compact limited-memory BFGS approximation of the Hessian,
///   B = theta I - W M W^T,  W = (Y | theta S),
///   M = [[-D, L^T], [L, theta S^T S]]^{-1},
/// with S the steps q_i, Y the gradient differences d_i, D = diag(S^T Y) and
/// L the strictly lower part of S^T Y.
class LimitedMemoryOperator {
 public:
  LimitedMemoryOperator(std::size_t memory, double theta);

  /// Stores (q, d) unless q^T d <= curvature_eps * |q| |d|; returns whether it
  /// was kept. The oldest pair is evicted beyond the memory size.
  bool push(const Eigen::VectorXd& q, const Eigen::VectorXd& d, double curvature_eps = 1e-12);
  void clear();

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd dense(std::size_t dimension) const;

  std::size_t size() const { return steps_.size(); }
  std::size_t memory() const { return memory_; }
  double theta() const { return theta_; }
  const Eigen::MatrixXd& W() const { return w_; }
  const Eigen::MatrixXd& M() const { return m_; }

 private:
  void assemble();

  std::size_t memory_;
  double theta_;
  std::deque<Eigen::VectorXd> steps_;
  std::deque<Eigen::VectorXd> grads_;
  Eigen::MatrixXd w_;
  Eigen::MatrixXd m_;
};

/// Builds the operator from column-wise pairs (oldest first); pairs that fail
/// the curvature test are skipped.
LimitedMemoryOperator compact_update(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y,
                                     double theta);

}  // namespace sird::optim
