#include "sird/optim/algorithms.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "sird/errors.hpp"
#include "sird/optim/limited_memory.hpp"
#include "sird/optim/trust_region.hpp"

namespace sird::optim {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

// Shared bookkeeping for one optimiser run.
class Run {
 public:
  Run(const BoxProblem& problem, const Eigen::VectorXd& x0, const char* name)
      : p(problem), start_(std::chrono::steady_clock::now()) {
    result.algorithm = name;
    if (x0.size() != static_cast<Eigen::Index>(problem.dimension())) {
      throw ConfigError("initial point has the wrong dimension");
    }
    if ((x0.array() < problem.lower().array()).any() ||
        (x0.array() > problem.upper().array()).any()) {
      throw ConfigError("initial point must be feasible");
    }
  }

  double norm(const Eigen::VectorXd& g) const {
    return g.size() == 0 ? 0.0 : g.norm() / std::sqrt(static_cast<double>(g.size()));
  }

  double norm_if_known(const Eigen::VectorXd& x) const {
    const auto g = p.cached_gradient(x);
    return g ? norm(*g) : kNaN;
  }

  FitResult finish(StopReason reason, std::string message = {}) {
    result.reason = reason;
    result.message = message.empty() ? to_string(reason) : std::move(message);
    if (result.best_x.size() > 0) {
      try {
        Eigen::VectorXd g;
        p.value_and_gradient(result.best_x, g);
        result.best_gradient = g;
        result.grad_norms[result.best_index] = norm(g);
      } catch (const NumericalError&) {
        // Leave the best gradient empty; the failure is already visible.
      }
    }
    result.value_evaluations = p.value_count();
    result.gradient_evaluations = p.gradient_count();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(result);
  }

  CountingProblem p;
  FitResult result;

 private:
  std::chrono::steady_clock::time_point start_;
};

template <typename Body>
FitResult guarded(Run& run, Body&& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    return run.finish(StopReason::EvaluationFailure, e.what());
  }
}

bool all_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a.array() == b.array()).all();
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::PGD: return "pgd";
    case Algorithm::FISTA: return "fista";
    case Algorithm::NMAPG: return "nmapg";
    case Algorithm::LMBFGS: return "lmbfgs";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  std::string s;
  for (char ch : name) {
    if (ch != '-' && ch != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (s == "pgd") return Algorithm::PGD;
  if (s == "fista") return Algorithm::FISTA;
  if (s == "nmapg") return Algorithm::NMAPG;
  if (s == "lmbfgs" || s == "lmbfgstr") return Algorithm::LMBFGS;
  throw ConfigError("unknown algorithm '" + name + "' (expected pgd, fista, nmapg or lmbfgs)");
}

void OptimizerConfig::validate() const {
  stop.validate();
  require(pgd.sigma > 0.0 && pgd.sigma < 1.0, "pgd: sigma must lie in (0, 1)");
  require(pgd.shrink > 0.0 && pgd.shrink < 1.0, "pgd: shrink must lie in (0, 1)");
  require(pgd.initial_step > 0.0, "pgd: initial step must be positive");
  require(pgd.grow >= 1.0, "pgd: grow must be at least 1");
  require(fista.L0 > 0.0, "fista: L0 must be positive");
  require(fista.eta > 1.0, "fista: eta must exceed 1");
  require(fista.nu > 2.0, "fista: nu must exceed 2");
  require(nmapg.mu >= 0.0 && nmapg.mu < 1.0, "nmapg: mu must lie in [0, 1)");
  require(nmapg.delta > 0.0, "nmapg: delta must be positive");
  require(nmapg.eta > 1.0, "nmapg: eta must exceed 1");
  require(nmapg.l_min > 0.0 && nmapg.l_min <= nmapg.l_max, "nmapg: need 0 < l_min <= l_max");
  const auto& b = lmbfgs;
  require(b.memory >= 1, "lmbfgs: memory must be at least 1");
  require(b.theta_bar > 0.0, "lmbfgs: theta_bar must be positive");
  require(b.c > 0.0, "lmbfgs: c must be positive");
  require(b.zeta > 0.0 && b.zeta < 1.0, "lmbfgs: zeta must lie in (0, 1)");
  require(b.nu_dec > 0.0 && b.nu_dec < 1.0, "lmbfgs: nu_dec must lie in (0, 1)");
  require(b.nu_inc > 1.0, "lmbfgs: nu_inc must exceed 1");
  require(b.tau_accept > 0.0 && b.tau_accept < b.tau_increase && b.tau_increase < 1.0,
          "lmbfgs: need 0 < tau_accept < tau_increase < 1");
  require(b.sigma > 0.0 && b.sigma < 1.0, "lmbfgs: sigma must lie in (0, 1)");
  require(b.omega > 0.0 && b.omega < 1.0, "lmbfgs: omega must lie in (0, 1)");
  require(b.delta0 > 0.0, "lmbfgs: delta0 must be positive");
  require(b.delta_min > 0.0 && b.delta_min < b.delta_max, "lmbfgs: need 0 < delta_min < delta_max");
  require(b.blend_tol > 0.0 && b.blend_tol < 1.0, "lmbfgs: blend_tol must lie in (0, 1)");
}

double surrogate_Q(const Eigen::VectorXd& x, const Eigen::VectorXd& w, double j_w,
                   const Eigen::VectorXd& grad_w, double L) {
  const Eigen::VectorXd diff = x - w;
  return j_w + diff.dot(grad_w) + 0.5 * L * diff.squaredNorm();
}

Eigen::VectorXd prox_step(const BoxProblem& problem, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& grad, double L) {
  if (!(L > 0.0)) throw ConfigError("prox_step: L must be positive");
  return problem.project(w - grad / L);
}

BbStep bb_stepsize(const Eigen::VectorXd& s, const Eigen::VectorXd& r, double l_min, double l_max) {
  const double ss = s.squaredNorm();
  if (ss == 0.0) return {l_min, true};
  const double q = s.dot(r) / ss;
  if (!std::isfinite(q)) return {l_min, true};
  return {std::clamp(q, l_min, l_max), false};
}

ActiveSet active_set(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, double psi,
                     double c, double zeta) {
  ActiveSet out;
  out.xi = std::min(psi, c * std::pow(grad.norm(), zeta));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= lower[i] + out.xi) {
      out.active.push_back(i);
      out.side.push_back(-1);
    } else if (x[i] >= upper[i] - out.xi) {
      out.active.push_back(i);
      out.side.push_back(+1);
    } else {
      out.inactive.push_back(i);
    }
  }
  return out;
}

BlendResult blend_search(const std::function<double(const Eigen::VectorXd&)>& objective,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& d_g,
                         const Eigen::VectorXd& d_tr, double tol) {
  BlendResult out;
  if (all_equal(d_g, d_tr)) return out;
  auto phi = [&](double s) {
    ++out.evaluations;
    return objective(x + (s * d_g + (1.0 - s) * d_tr));
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = phi(c), fd = phi(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = phi(d);
    }
  }
  out.t = fc <= fd ? c : d;
  out.value = std::min(fc, fd);
  for (double s : {0.0, 1.0}) {
    const double f = phi(s);
    if (f < out.value) {
      out.value = f;
      out.t = s;
    }
  }
  return out;
}

static FitResult run_pgd(const BoxProblem& problem, const Eigen::VectorXd& x0,
                           const OptimizerConfig& cfg) {
  Run run(problem, x0, "pgd");
  return guarded(run, [&]() {
    auto& P = run.p;
    Eigen::VectorXd x = x0, g, x_new, g_new;
    double j = P.value_and_gradient(x, g);
    run.result.record(x, j, run.norm(g));
    double step = cfg.pgd.initial_step;

    for (std::size_t k = 1;; ++k) {
      if (projected_gradient_norm(problem, x, g) <= cfg.stop.tol_pg) {
        return run.finish(StopReason::Stationary);
      }
      double trial = step * cfg.pgd.grow;
      bool accepted = false;
      double j_new = 0.0;
      for (std::size_t bt = 0; bt <= cfg.pgd.max_backtracks; ++bt) {
        x_new = problem.project(x - trial * g);
        j_new = P.value_and_gradient(x_new, g_new);
        if (j_new <= j + cfg.pgd.sigma * g.dot(x_new - x)) {
          accepted = true;
          break;
        }
        trial *= cfg.pgd.shrink;
      }
      if (!accepted) return run.finish(StopReason::BacktrackFailure);
      step = trial;
      run.result.record(x_new, j_new, run.norm(g_new));
      const auto decision = check_stopping(k, x, x_new, j, j_new, cfg.stop, StopPhase::FirstOrder);
      x.swap(x_new);
      g.swap(g_new);
      j = j_new;
      if (decision.stop) return run.finish(decision.reason);
    }
  });
}

static FitResult run_fista(const BoxProblem& problem, const Eigen::VectorXd& x0,
                           const OptimizerConfig& cfg) {
  Run run(problem, x0, "fista");
  return guarded(run, [&]() {
    auto& P = run.p;
    const auto& c = cfg.fista;
    Eigen::VectorXd alpha = x0, omega = x0, g_w;
    double L = c.L0;
    double theta = 1.0;
    double j_alpha = P.value_and_gradient(alpha, g_w);
    run.result.record(alpha, j_alpha, run.norm(g_w));

    for (std::size_t k = 0;; ++k) {
      const double j_w = P.value_and_gradient(omega, g_w);
      if (all_equal(omega, alpha) &&
          projected_gradient_norm(problem, omega, g_w) <= cfg.stop.tol_pg) {
        return run.finish(StopReason::Stationary);
      }
      Eigen::VectorXd next;
      double j_next = 0.0;
      bool accepted = false;
      double trial = L;
      for (std::size_t i = 0; i <= c.max_backtracks; ++i, trial *= c.eta) {
        next = prox_step(problem, omega, g_w, trial);
        j_next = P.value(next);
        const double q = surrogate_Q(next, omega, j_w, g_w, trial);
        if (j_next <= q) {
          run.result.backtracks.push_back({k, trial, j_next, q});
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        std::ostringstream msg;
        msg << "fista: no sufficient decrease after " << c.max_backtracks << " backtracks (L = "
            << trial << ")";
        return run.finish(StopReason::BacktrackFailure, msg.str());
      }
      L = trial;
      const double theta_next = 1.0 + static_cast<double>(k) / c.nu;
      omega = next + ((theta - 1.0) / theta_next) * (next - alpha);
      theta = theta_next;
      run.result.record(next, j_next, run.norm_if_known(next));
      const auto decision =
          check_stopping(k + 1, alpha, next, j_alpha, j_next, cfg.stop, StopPhase::FirstOrder);
      alpha = next;
      j_alpha = j_next;
      if (decision.stop) return run.finish(decision.reason);
    }
  });
}

static FitResult run_nmapg(const BoxProblem& problem, const Eigen::VectorXd& x0,
                           const OptimizerConfig& cfg) {
  Run run(problem, x0, "nmapg");
  return guarded(run, [&]() {
    auto& P = run.p;
    const auto& c = cfg.nmapg;
    Eigen::VectorXd alpha = x0, alpha_prev = x0, omega = x0, nu_prev = x0;
    Eigen::VectorXd g_nu_prev, g_nu, g_alpha;
    double theta_prev = 0.0, theta = 1.0;
    double j_alpha = P.value_and_gradient(nu_prev, g_nu_prev);
    double monitor = j_alpha;
    double lambda = 1.0;
    double last_L = c.l_min;
    run.result.record(alpha, j_alpha, run.norm(g_nu_prev));

    auto backtrack = [&](const Eigen::VectorXd& base, const Eigen::VectorXd& grad, double L0,
                         double reference, Eigen::VectorXd& out, double& j_out, double& L_out) {
      double L = L0;
      for (std::size_t i = 0; i <= c.max_backtracks; ++i, L *= c.eta) {
        out = prox_step(problem, base, grad, L);
        j_out = P.value(out);
        if (j_out <= reference - c.delta * (out - base).squaredNorm()) {
          L_out = L;
          return true;
        }
      }
      return false;
    };

    for (std::size_t k = 1;; ++k) {
      const Eigen::VectorXd nu = alpha + (theta_prev / theta) * (omega - alpha) +
                                 ((theta_prev - 1.0) / theta) * (alpha - alpha_prev);
      const double j_nu = P.value_and_gradient(nu, g_nu);
      if (all_equal(nu, alpha) && projected_gradient_norm(problem, nu, g_nu) <= cfg.stop.tol_pg) {
        return run.finish(StopReason::Stationary);
      }

      BbStep bb = bb_stepsize(nu - nu_prev, g_nu - g_nu_prev, c.l_min, c.l_max);
      const double L_start = bb.degenerate ? last_L : bb.L;
      Eigen::VectorXd omega_next;
      double j_omega = 0.0, L_used = 0.0;
      // The max-branch test: j(w) <= max(c_k, j(nu)) - delta |w - nu|^2.
      if (!backtrack(nu, g_nu, L_start, std::max(monitor, j_nu), omega_next, j_omega, L_used)) {
        return run.finish(StopReason::BacktrackFailure, "nmapg: extrapolation backtracking failed");
      }
      last_L = L_used;

      Eigen::VectorXd next;
      double j_next = 0.0;
      bool corrected = false;
      bool decrease_ok = false;
      const double omega_slack = c.delta * (omega_next - nu).squaredNorm();
      if (j_omega <= monitor - omega_slack) {
        next = omega_next;
        j_next = j_omega;
        decrease_ok = true;
      } else {
        corrected = true;
        P.value_and_gradient(alpha, g_alpha);
        bb = bb_stepsize(alpha - nu_prev, g_alpha - g_nu_prev, c.l_min, c.l_max);
        Eigen::VectorXd xi;
        double j_xi = 0.0, L_xi = 0.0;
        if (!backtrack(alpha, g_alpha, bb.degenerate ? last_L : bb.L, monitor, xi, j_xi, L_xi)) {
          return run.finish(StopReason::BacktrackFailure, "nmapg: correction backtracking failed");
        }
        if (j_omega <= j_xi) {
          next = omega_next;
          j_next = j_omega;
          decrease_ok = j_omega <= std::max(monitor, j_nu) - omega_slack;
        } else {
          next = xi;
          j_next = j_xi;
          decrease_ok = j_xi <= monitor - c.delta * (xi - alpha).squaredNorm();
        }
      }

      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const double lambda_next = c.mu * lambda + 1.0;
      const double monitor_next = (c.mu * lambda * monitor + j_next) / lambda_next;
      run.result.monitor.push_back({k, monitor, j_next, monitor_next, decrease_ok, corrected});

      nu_prev = nu;
      g_nu_prev = g_nu;
      omega = omega_next;
      alpha_prev = alpha;
      theta_prev = theta;
      theta = theta_next;
      lambda = lambda_next;
      monitor = monitor_next;

      run.result.record(next, j_next, run.norm_if_known(next));
      const auto decision =
          check_stopping(k, alpha, next, j_alpha, j_next, cfg.stop, StopPhase::FirstOrder);
      alpha = next;
      j_alpha = j_next;
      if (decision.stop) return run.finish(decision.reason);
    }
  });
}

static FitResult run_lmbfgs(const BoxProblem& problem, const Eigen::VectorXd& x0,
                            const OptimizerConfig& cfg) {
  Run run(problem, x0, "lmbfgs");
  return guarded(run, [&]() {
    auto& P = run.p;
    const auto& c = cfg.lmbfgs;
    const Eigen::VectorXd& lo = problem.lower();
    const Eigen::VectorXd& hi = problem.upper();
    const double width = (hi - lo).minCoeff();
    const double psi = c.psi > 0.0 ? c.psi : std::min(0.1, width / 4.0);
    if (!(psi < width / 2.0)) throw ConfigError("lmbfgs: psi must be below half the box width");

    LimitedMemoryOperator B(c.memory, c.theta_bar);
    Eigen::VectorXd x = x0, g, g_new;
    double j = P.value_and_gradient(x, g);
    run.result.record(x, j, run.norm(g));
    double radius = c.delta0;
    std::size_t restarts_left = c.restarts;
    std::size_t block = 0;
    auto value_of = [&](const Eigen::VectorXd& y) { return P.value(y); };

    for (std::size_t k = 1;; ++k) {
      if (projected_gradient_norm(problem, x, g) <= cfg.stop.tol_pg) {
        return run.finish(StopReason::Stationary);
      }
      radius = std::min(c.delta_max, std::max(c.delta_min, radius));
      const double clamped = radius;
      double trial_radius = radius;
      const ActiveSet sets = active_set(x, g, lo, hi, psi, c.c, c.zeta);
      const double g_norm = g.norm();
      const double kappa = std::min({1.0, c.delta_max / g_norm, c.omega / g_norm});

      Eigen::VectorXd x_new, d;
      double j_new = 0.0, ratio = 0.0;
      for (;;) {
        // Active coordinates head for their bound.
        Eigen::VectorXd v(static_cast<Eigen::Index>(sets.active.size()));
        for (std::size_t a = 0; a < sets.active.size(); ++a) {
          const Eigen::Index i = sets.active[a];
          v[static_cast<Eigen::Index>(a)] = sets.side[a] < 0 ? -(x[i] - lo[i]) : hi[i] - x[i];
        }
        const double v_norm = v.norm();
        const Eigen::VectorXd d_active =
            v_norm > 0.0 ? Eigen::VectorXd(std::min(1.0, trial_radius / v_norm) * v) : v;
        const TrustRegionStep sub =
            tr_subproblem(B, sets.inactive, sets.active, d_active, g, trial_radius);
        Eigen::VectorXd step = Eigen::VectorXd::Zero(x.size());
        for (std::size_t a = 0; a < sets.active.size(); ++a) {
          step[sets.active[a]] = d_active[static_cast<Eigen::Index>(a)];
        }
        for (std::size_t a = 0; a < sets.inactive.size(); ++a) {
          step[sets.inactive[a]] = sub.d[static_cast<Eigen::Index>(a)];
        }
        const Eigen::VectorXd d_tr = problem.project(x + step) - x;
        const Eigen::VectorXd d_g =
            problem.project(x - (trial_radius / c.delta_max) * kappa * g) - x;

        const BlendResult blend = blend_search(value_of, x, d_g, d_tr, c.blend_tol);
        d = blend.t * d_g + (1.0 - blend.t) * d_tr;
        x_new = x + d;
        j_new = blend.evaluations > 0 ? blend.value : P.value(x_new);
        const double predicted = g.dot(d) + 0.5 * d.dot(B.apply(d));
        ratio = predicted < 0.0 ? (j_new - j) / predicted : -std::numeric_limits<double>::infinity();
        const double required = -c.sigma * g.dot(d_g);
        const bool accept = d.squaredNorm() > 0.0 && j - j_new >= required && ratio >= c.tau_accept;
        run.result.trust_region.push_back(
            {k, clamped, trial_radius, ratio, j - j_new, required, blend.t, accept});
        if (accept) break;
        trial_radius *= c.nu_dec;
        if (trial_radius < c.delta_min) return run.finish(StopReason::RadiusCollapse);
      }

      const double j_accepted = P.value_and_gradient(x_new, g_new);
      (void)j_accepted;
      if (B.push(d, g_new - g, c.curvature_eps)) run.result.stored_curvature.push_back(d.dot(g_new - g));
      radius = ratio >= c.tau_increase ? c.nu_inc * trial_radius : trial_radius;
      run.result.record(x_new, j_new, run.norm(g_new));

      ++block;
      StoppingConfig stop = cfg.stop;
      stop.it_max = std::numeric_limits<std::size_t>::max();
      auto decision = check_stopping(k, x, x_new, j, j_new, stop, StopPhase::TrustRegion,
                                     trial_radius, c.delta_min);
      x.swap(x_new);
      g.swap(g_new);
      j = j_new;
      if (decision.stop) return run.finish(decision.reason);
      if (block >= cfg.stop.it_max) {
        if (restarts_left == 0) return run.finish(StopReason::IterationLimit);
        --restarts_left;
        block = 0;
        B.clear();
        radius = c.delta0;
      }
    }
  });
}

namespace {

// The same problem in y = f .* x. The inner gradient is a density for the
// weights w (w = 1 for a Euclidean problem), so dj/dy = w .* g ./ f.
class ScaledProblem : public BoxProblem {
 public:
  ScaledProblem(const BoxProblem& inner, Eigen::VectorXd factor, Eigen::VectorXd weights)
      : inner_(inner),
        factor_(std::move(factor)),
        weights_(std::move(weights)),
        lower_(inner.lower().cwiseProduct(factor_)),
        upper_(inner.upper().cwiseProduct(factor_)) {}

  std::size_t dimension() const override { return inner_.dimension(); }
  double value(const Eigen::VectorXd& y) const override { return inner_.value(to_x(y)); }
  double value_and_gradient(const Eigen::VectorXd& y, Eigen::VectorXd& grad) const override {
    const double v = inner_.value_and_gradient(to_x(y), grad);
    grad = grad.cwiseProduct(weights_).cwiseQuotient(factor_);
    return v;
  }
  const Eigen::VectorXd& lower() const override { return lower_; }
  const Eigen::VectorXd& upper() const override { return upper_; }

  Eigen::VectorXd to_x(const Eigen::VectorXd& y) const { return y.cwiseQuotient(factor_); }
  Eigen::VectorXd to_y(const Eigen::VectorXd& x) const { return x.cwiseProduct(factor_); }
  Eigen::VectorXd density(const Eigen::VectorXd& grad_y) const {
    return grad_y.cwiseProduct(factor_).cwiseQuotient(weights_);
  }

 private:
  const BoxProblem& inner_;
  Eigen::VectorXd factor_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

using Runner = FitResult (*)(const BoxProblem&, const Eigen::VectorXd&, const OptimizerConfig&);

FitResult run_in_metric(Runner runner, const BoxProblem& problem, const Eigen::VectorXd& x0,
                        const OptimizerConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXd* w = problem.metric();
  if (w == nullptr && !cfg.box_scaling) return runner(problem, x0, cfg);
  const Eigen::Index n = static_cast<Eigen::Index>(problem.dimension());
  if (x0.size() != n) throw ConfigError("initial point has the wrong dimension");
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(n);
  if (w != nullptr) {
    if (w->size() != n || !(w->array() > 0.0).all()) {
      throw ConfigError("metric weights must be positive and match the dimension");
    }
    weights = *w;
  }
  Eigen::VectorXd factor = weights.cwiseSqrt();
  if (cfg.box_scaling) {
    const Eigen::VectorXd width = problem.upper() - problem.lower();
    if (!(width.array() > 0.0).all() || !width.allFinite()) {
      throw ConfigError("box scaling needs finite bounds with positive width");
    }
    factor = factor.cwiseQuotient(width);
  }
  const ScaledProblem scaled(problem, std::move(factor), std::move(weights));
  FitResult r = runner(scaled, scaled.to_y(x0), cfg);
  for (auto& x : r.iterates) x = scaled.to_x(x);
  if (r.best_x.size() > 0) r.best_x = scaled.to_x(r.best_x);
  if (r.best_gradient.size() > 0) r.best_gradient = scaled.density(r.best_gradient);
  return r;
}

}  // namespace

FitResult pgd(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
  return run_in_metric(run_pgd, problem, x0, cfg);
}

FitResult fista(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
  return run_in_metric(run_fista, problem, x0, cfg);
}

FitResult nmapg(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
  return run_in_metric(run_nmapg, problem, x0, cfg);
}

FitResult lmbfgs_tr(const BoxProblem& problem, const Eigen::VectorXd& x0,
                    const OptimizerConfig& cfg) {
  return run_in_metric(run_lmbfgs, problem, x0, cfg);
}

FitResult minimize(const BoxProblem& problem, const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::PGD: return pgd(problem, x0, cfg);
    case Algorithm::FISTA: return fista(problem, x0, cfg);
    case Algorithm::NMAPG: return nmapg(problem, x0, cfg);
    case Algorithm::LMBFGS: return lmbfgs_tr(problem, x0, cfg);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace sird::optim
