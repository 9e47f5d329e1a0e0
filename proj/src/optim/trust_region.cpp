#include "sird/optim/trust_region.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "sird/errors.hpp"

namespace sird::optim {
namespace {

// Largest tau >= 0 with |z + tau p| = radius.
double to_boundary(const Eigen::VectorXd& z, const Eigen::VectorXd& p, double radius) {
  const double a = p.squaredNorm();
  const double b = 2.0 * z.dot(p);
  const double c = z.squaredNorm() - radius * radius;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  // Numerically stable positive root (c <= 0 inside the region).
  if (b >= 0.0) return (-2.0 * c) / (b + std::sqrt(disc));
  return (-b + std::sqrt(disc)) / (2.0 * a);
}

double model_value(const LinearMap& hessian, const Eigen::VectorXd& g, const Eigen::VectorXd& d) {
  return g.dot(d) + 0.5 * d.dot(hessian(d));
}

}  // namespace

TrustRegionStep steihaug_cg(const LinearMap& hessian, const Eigen::VectorXd& g, double radius,
                            double rel_tol, std::size_t max_iter) {
  if (!(radius > 0.0)) throw ConfigError("trust-region radius must be positive");
  const Eigen::Index n = g.size();
  if (max_iter == 0) max_iter = static_cast<std::size_t>(2 * n + 10);

  TrustRegionStep out;
  out.d = Eigen::VectorXd::Zero(n);
  const double g_norm = g.norm();
  if (g_norm == 0.0) return out;

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = g;
  Eigen::VectorXd p = -r;
  double rr = r.squaredNorm();
  for (std::size_t it = 0; it < max_iter; ++it) {
    out.cg_iterations = it + 1;
    const Eigen::VectorXd hp = hessian(p);
    const double curvature = p.dot(hp);
    if (curvature <= 0.0) {
      z += to_boundary(z, p, radius) * p;
      out.on_boundary = true;
      break;
    }
    const double alpha = rr / curvature;
    const Eigen::VectorXd z_next = z + alpha * p;
    if (z_next.norm() >= radius) {
      z += to_boundary(z, p, radius) * p;
      out.on_boundary = true;
      break;
    }
    z = z_next;
    r += alpha * hp;
    const double rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= rel_tol * g_norm) break;
    p = -r + (rr_next / rr) * p;
    rr = rr_next;
  }
  out.d = z;
  out.model = model_value(hessian, g, z);
  return out;
}

TrustRegionStep solve_trust_region_dense(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                         double radius) {
  if (!(radius > 0.0)) throw ConfigError("trust-region radius must be positive");
  const Eigen::Index n = g.size();
  TrustRegionStep out;
  out.d = Eigen::VectorXd::Zero(n);
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (H + H.transpose()));
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::VectorXd gt = V.transpose() * g;
  const double lam_min = lam[0];
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double g_norm = g.norm();

  auto step_for = [&](double shift, Eigen::VectorXd& coeff) {
    coeff.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lam[i] + shift;
      coeff[i] = den > 0.0 ? -gt[i] / den : 0.0;
    }
    return coeff.norm();
  };

  Eigen::VectorXd coeff;
  const double eps = 1e-13 * scale;
  if (lam_min > eps && step_for(0.0, coeff) <= radius) {
    out.d = V * coeff;
    out.model = g.dot(out.d) + 0.5 * out.d.dot(H * out.d);
    return out;
  }

  const double floor = std::max(0.0, -lam_min);
  // Hard case: gradient has no weight on the bottom eigenspace.
  double bottom_weight = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lam[i] - lam_min <= eps) bottom_weight = std::max(bottom_weight, std::abs(gt[i]));
  }
  if (bottom_weight <= 1e-14 * std::max(1.0, g_norm)) {
    Eigen::VectorXd partial(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lam[i] + floor;
      partial[i] = (lam[i] - lam_min <= eps) ? 0.0 : -gt[i] / den;
    }
    const double pn = partial.norm();
    if (pn <= radius) {
      partial[0] += std::sqrt(std::max(0.0, radius * radius - pn * pn));
      out.d = V * partial;
      out.on_boundary = true;
      out.model = g.dot(out.d) + 0.5 * out.d.dot(H * out.d);
      return out;
    }
  }

  // Bracket the multiplier: |p(lo)| > radius >= |p(hi)|.
  double lo = floor;
  double hi = floor + g_norm / radius + scale;
  while (step_for(hi, coeff) > radius) hi *= 2.0;
  double shift = hi;
  for (int it = 0; it < 200; ++it) {
    const double pn = step_for(shift, coeff);
    if (std::abs(pn - radius) <= 1e-15 * radius) break;
    if (pn > radius) {
      lo = shift;
    } else {
      hi = shift;
    }
    // Newton on 1/|p| - 1/radius, which is close to linear in the shift.
    double dphi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lam[i] + shift;
      if (den > 0.0) dphi += coeff[i] * coeff[i] / den;
    }
    double next = shift + (pn * pn / dphi) * (pn - radius) / radius;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
    shift = next;
  }
  step_for(shift, coeff);
  out.d = V * coeff;
  out.on_boundary = true;
  out.model = g.dot(out.d) + 0.5 * out.d.dot(H * out.d);
  return out;
}

TrustRegionStep tr_subproblem(const LimitedMemoryOperator& B, const std::vector<Eigen::Index>& inactive,
                              const std::vector<Eigen::Index>& active,
                              const Eigen::VectorXd& d_active, const Eigen::VectorXd& grad,
                              double radius, std::size_t dense_limit) {
  const Eigen::Index n = grad.size();
  const auto ni = static_cast<Eigen::Index>(inactive.size());
  TrustRegionStep out;
  out.d = Eigen::VectorXd::Zero(ni);
  if (ni == 0) return out;

  Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < active.size(); ++k) full[active[k]] = d_active[static_cast<Eigen::Index>(k)];
  const Eigen::VectorXd shifted = grad + B.apply(full);
  const Eigen::VectorXd b_shifted = B.apply(shifted);
  Eigen::VectorXd linear(ni);
  for (Eigen::Index k = 0; k < ni; ++k) linear[k] = b_shifted[inactive[static_cast<std::size_t>(k)]];

  const LinearMap hessian = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < ni; ++k) e[inactive[static_cast<std::size_t>(k)]] = v[k];
    const Eigen::VectorXd bbv = B.apply(B.apply(e));
    Eigen::VectorXd r(ni);
    for (Eigen::Index k = 0; k < ni; ++k) r[k] = bbv[inactive[static_cast<std::size_t>(k)]];
    return r;
  };

  out = steihaug_cg(hessian, linear, radius);
  if (out.on_boundary && static_cast<std::size_t>(ni) <= dense_limit) {
    Eigen::MatrixXd H(ni, ni);
    for (Eigen::Index k = 0; k < ni; ++k) H.col(k) = hessian(Eigen::VectorXd::Unit(ni, k));
    TrustRegionStep exact = solve_trust_region_dense(H, linear, radius);
    exact.cg_iterations = out.cg_iterations;
    if (exact.model < out.model) out = std::move(exact);
  }
  return out;
}

}  // namespace sird::optim
