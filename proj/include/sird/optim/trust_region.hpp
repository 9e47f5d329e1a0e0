#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "sird/optim/limited_memory.hpp"

namespace sird::optim {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct TrustRegionStep {
  Eigen::VectorXd d;
  /// g^T d + 1/2 d^T H d at the returned d.
  double model = 0.0;
  bool on_boundary = false;
  std::size_t cg_iterations = 0;
};

/// Steihaug-Toint truncated CG for min g^T d + 1/2 d^T H d, |d| <= radius.
TrustRegionStep steihaug_cg(const LinearMap& hessian, const Eigen::VectorXd& g, double radius,
                            double rel_tol = 1e-10, std::size_t max_iter = 0);

/// Nearly exact solution of the same problem for a dense symmetric H via its
/// eigendecomposition and a safeguarded Newton iteration on the multiplier;
/// handles the hard case.
TrustRegionStep solve_trust_region_dense(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                         double radius);

/// Reduced subproblem over the inactive coordinates:
///   min d^T [B_I^T (grad + B_A d_A)] + 1/2 d^T B_I^T B_I d,  |d| <= radius,
/// where B_I / B_A are the columns of B indexed by `inactive` / `active`.
/// Truncated CG in operator form; when CG stops on the boundary and the
/// reduced dimension is at most `dense_limit`, the result is refined by the
/// dense solver.
TrustRegionStep tr_subproblem(const LimitedMemoryOperator& B, const std::vector<Eigen::Index>& inactive,
                              const std::vector<Eigen::Index>& active,
                              const Eigen::VectorXd& d_active, const Eigen::VectorXd& grad,
                              double radius, std::size_t dense_limit = 64);

}  // namespace sird::optim
