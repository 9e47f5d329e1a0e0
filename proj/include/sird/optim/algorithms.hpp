#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sird/optim/problem.hpp"

namespace sird::optim {

enum class Algorithm { PGD, FISTA, NMAPG, LMBFGS };

const char* to_string(Algorithm a);
/// Accepts pgd, fista, nmapg, lmbfgs (case-insensitive); throws ConfigError.
Algorithm parse_algorithm(const std::string& name);

struct PgdConfig {
  double sigma = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  /// Factor applied to the last accepted step to seed the next search.
  double grow = 1.0;
  std::size_t max_backtracks = 100;
};

struct FistaConfig {
  double L0 = 1.0;
  double eta = 2.0;
  double nu = 2.1;
  std::size_t max_backtracks = 100;
};

struct NmapgConfig {
  double mu = 0.8;
  double delta = 1e-4;
  double eta = 2.0;
  double l_min = 1e-8;
  double l_max = 1e8;
  std::size_t max_backtracks = 100;
};

struct LmbfgsConfig {
  std::size_t memory = 5;
  double theta_bar = 1.0;
  /// Non-positive means min(0.1, l_A / 4) with l_A the smallest box width.
  double psi = 0.0;
  double c = 1.0;
  double zeta = 0.5;
  double nu_dec = 0.5;
  double nu_inc = 2.0;
  double tau_accept = 0.1;
  double tau_increase = 0.75;
  double sigma = 1e-4;
  double omega = 0.9;
  double delta0 = 0.1;
  double delta_min = 1e-6;
  double delta_max = 1.0;
  double curvature_eps = 1e-12;
  double blend_tol = 1e-3;
  /// Fresh starts (memory and radius reset) after each block of it_max iterations.
  std::size_t restarts = 0;
};

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::PGD;
  StoppingConfig stop;
  PgdConfig pgd;
  FistaConfig fista;
  NmapgConfig nmapg;
  LmbfgsConfig lmbfgs;
  /// Run in y = x / (upper - lower) so every coordinate spans [0, 1]-sized boxes.
  bool box_scaling = false;

  /// Enforces the parameter ranges of every algorithm; throws ConfigError.
  void validate() const;
};

FitResult pgd(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg);
FitResult fista(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg);
FitResult nmapg(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg);
FitResult lmbfgs_tr(const BoxProblem& problem, const Eigen::VectorXd& x0,
                    const OptimizerConfig& cfg);
/// Dispatches on cfg.algorithm.
FitResult minimize(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg);

/// j(w) + <x - w, grad> + L/2 |x - w|^2 for feasible x.
double surrogate_Q(const Eigen::VectorXd& x, const Eigen::VectorXd& w, double j_w,
                   const Eigen::VectorXd& grad_w, double L);

/// P(w - grad / L).
Eigen::VectorXd prox_step(const BoxProblem& problem, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& grad, double L);

struct BbStep {
  double L = 0.0;
  bool degenerate = false;
};

/// Clip of s^T r / s^T s to [l_min, l_max]; s = 0 gives l_min, flagged.
BbStep bb_stepsize(const Eigen::VectorXd& s, const Eigen::VectorXd& r, double l_min, double l_max);

struct ActiveSet {
  double xi = 0.0;
  std::vector<Eigen::Index> active;
  std::vector<Eigen::Index> inactive;
  /// Per active index: -1 for a lower-bound coordinate, +1 for upper.
  std::vector<int> side;
};

/// xi = min(psi, c |grad|^zeta); active when within xi of a bound.
ActiveSet active_set(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, double psi,
                     double c, double zeta);

struct BlendResult {
  double t = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Approximate argmin over s in [0, 1] of phi(s) = j(x + s d_G + (1 - s) d_tr)
/// by golden-section search, compared against both endpoints.
BlendResult blend_search(const std::function<double(const Eigen::VectorXd&)>& objective,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& d_g,
                         const Eigen::VectorXd& d_tr, double tol = 1e-3);

}  // namespace sird::optim
