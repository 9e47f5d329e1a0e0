// Dense reference computations shared by the optimiser tests and the
// acceptance suite.
#pragma once

#include <random>

#include <Eigen/Dense>

namespace oracles {

// Dense BFGS recursion from B0 = theta I, pairs column-wise oldest first.
inline Eigen::MatrixXd dense_bfgs(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y, double theta) {
  Eigen::MatrixXd B = theta * Eigen::MatrixXd::Identity(S.rows(), S.rows());
  for (Eigen::Index i = 0; i < S.cols(); ++i) {
    const Eigen::VectorXd s = S.col(i), y = Y.col(i);
    const Eigen::VectorXd Bs = B * s;
    B += y * y.transpose() / y.dot(s) - Bs * Bs.transpose() / s.dot(Bs);
  }
  return B;
}

// Pairs (S, H S) from a random SPD matrix H, so every curvature is positive.
inline void random_pairs(std::mt19937& rng, int n, int m, Eigen::MatrixXd& S, Eigen::MatrixXd& Y) {
  std::normal_distribution<double> nrm(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nrm(rng);
  const Eigen::MatrixXd H = A * A.transpose() + Eigen::MatrixXd::Identity(n, n);
  S.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) S(i, j) = nrm(rng);
  Y = H * S;
}

// Optimal model value of min g^T d + 1/2 d^T H d, |d| <= radius, for SPD H:
// the Newton step when it fits, otherwise bisection on the multiplier.
inline double tr_oracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, double radius) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Eigen::VectorXd gh = eig.eigenvectors().transpose() * g;
  auto step = [&](double mu) { return Eigen::VectorXd(-(gh.array() / (lam.array() + mu)).matrix()); };
  Eigen::VectorXd dh = step(0.0);
  if (dh.norm() > radius) {
    double lo = 0.0, hi = 1.0;
    while (step(hi).norm() > radius) hi *= 2;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (step(mid).norm() > radius ? lo : hi) = mid;
    }
    dh = step(hi);
  }
  return gh.dot(dh) + 0.5 * dh.dot((lam.array() * dh.array()).matrix());
}

inline double model(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& d) {
  return g.dot(d) + 0.5 * d.dot(H * d);
}

}  // namespace oracles
