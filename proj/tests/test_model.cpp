#include <doctest.h>

#include <cmath>
#include <random>

#include "sird/errors.hpp"
#include "sird/model.hpp"
#include "sird/objective.hpp"

using namespace sird;

namespace {

Vec3 fd_column(const Vec3& rho, const Vec3& alpha, int j, double h) {
  Vec3 p = rho, m = rho;
  p[j] += h;
  m[j] -= h;
  return (state_rhs(p, alpha) - state_rhs(m, alpha)) / (2.0 * h);
}

ParameterVector constant(const Vec3& a) { return ParameterVector::constant(a[0], a[1], a[2]); }

}  // namespace

TEST_CASE("state_rhs by direct substitution") {
  const Vec3 f = state_rhs(Vec3(199, 1, 0), Vec3(0.03, 0.6, 0));
  CHECK(f[0] == doctest::Approx(-5.97));
  CHECK(f[1] == doctest::Approx(5.37));
  CHECK(f[2] == doctest::Approx(0.6));
  CHECK(state_rhs(Vec3(50, 0, 3), Vec3(0.4, 0.2, 0.1)).norm() == 0.0);
}

TEST_CASE("total change of the state equals the death flux") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Vec3 rho(100 * u(rng), 100 * u(rng), 100 * u(rng));
    const Vec3 a(u(rng), u(rng), u(rng));
    CHECK(state_rhs(rho, a).sum() == doctest::Approx(-a[2] * rho[1]).epsilon(1e-12));
  }
}

TEST_CASE("jacobian: hand value, zero rates and difference quotients") {
  const Vec3 a(0.3, 0.2, 0.1);
  Eigen::Matrix3d expected;
  expected << 0, -0.3, 0, 0, 0.3 - 0.2 - 0.1, 0, 0, 0.2, 0;
  CHECK((state_jacobian(Vec3(1, 0, 0), a) - expected).norm() == 0.0);
  CHECK(state_jacobian(Vec3(4, 5, 6), Vec3::Zero()).norm() == 0.0);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec3 rho(10 * u(rng), 10 * u(rng), 10 * u(rng));
    const Vec3 al(u(rng), u(rng), u(rng));
    const Eigen::Matrix3d J = state_jacobian(rho, al);
    for (int j = 0; j < 3; ++j) CHECK((J.col(j) - fd_column(rho, al, j, 1e-5)).norm() <= 1e-7);
  }
}

TEST_CASE("adjoint_rhs equals the matrix form") {
  CHECK(adjoint_rhs(Vec3::Zero(), Vec3(3, 4, 5), Vec3(0.2, 0.3, 0.4), Vec3::Zero()).norm() == 0.0);
  const Vec3 ones = adjoint_rhs(Vec3::Ones(), Vec3(3, 4, 5), Vec3(0.2, 0.3, 0.4), Vec3::Zero());
  CHECK(ones[0] == doctest::Approx(0.0));
  CHECK(ones[1] == doctest::Approx(0.4));
  CHECK(ones[2] == doctest::Approx(0.0));

  std::mt19937 rng(5);
  std::normal_distribution<double> nrm(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Vec3 q(nrm(rng), nrm(rng), nrm(rng)), rho(nrm(rng), nrm(rng), nrm(rng));
    const Vec3 a(std::abs(nrm(rng)), std::abs(nrm(rng)), std::abs(nrm(rng)));
    const Vec3 dr(nrm(rng), nrm(rng), nrm(rng));
    const Vec3 oracle = -state_jacobian(rho, a).transpose() * q - dr;
    CHECK((adjoint_rhs(q, rho, a, dr) - oracle).norm() <= 1e-14 * (1.0 + oracle.norm()));
    // Linear in q without a source.
    const Vec3 q2(nrm(rng), nrm(rng), nrm(rng));
    const Vec3 lhs = adjoint_rhs(2.0 * q + q2, rho, a, Vec3::Zero());
    const Vec3 rhs = 2.0 * adjoint_rhs(q, rho, a, Vec3::Zero()) + adjoint_rhs(q2, rho, a, Vec3::Zero());
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
  }
}

TEST_CASE("outbreak: infected peak sits strictly inside the horizon") {
  const auto s = solve_state(constant(Vec3(0.03, 0.6, 0.0)), Vec3(199, 1, 0), 10.0, 200);
  Eigen::Index peak = 0;
  s.rho().row(1).maxCoeff(&peak);
  CHECK(peak > 0);
  CHECK(peak < s.rho().cols() - 1);
  // Conservation when m = 0.
  for (Eigen::Index k = 0; k < s.rho().cols(); ++k) {
    CHECK(std::abs(s.rho().col(k).sum() - 200.0) <= 1e-6 * 200.0);
  }
}

TEST_CASE("disease-free start stays constant") {
  const auto s = solve_state(constant(Vec3(0.5, 0.2, 0.1)), Vec3(100, 0, 0), 5.0, 50);
  for (Eigen::Index k = 0; k < s.rho().cols(); ++k) {
    CHECK((s.rho().col(k) - Vec3(100, 0, 0)).norm() <= 1e-12 * 100);
  }
}

TEST_CASE("invariant region, monotone mass and determinism over random inputs") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double n = 1.0 + 99.0 * u(rng);
    Vec3 w(u(rng), u(rng), u(rng));
    const Vec3 rho0 = n * w / w.sum();
    const Vec3 a(u(rng), u(rng), u(rng));
    const auto s = solve_state(constant(a), rho0, 2.0, 40);
    const auto& r = s.rho();
    CHECK(r.minCoeff() >= -1e-6 * n);
    for (Eigen::Index c = 0; c < r.cols(); ++c) {
      CHECK(r.col(c).sum() <= n * (1.0 + 1e-6));
      if (c > 0) {
        CHECK(r.col(c).sum() <= r.col(c - 1).sum() + 1e-8 * n);
        CHECK(r(0, c) <= r(0, c - 1) + 1e-8 * n);
      }
    }
    if (k % 25 == 0) {
      const auto again = solve_state(constant(a), rho0, 2.0, 40);
      CHECK((again.rho() - r).norm() == 0.0);
    }
  }
}

TEST_CASE("exact-fit adjoint vanishes and the terminal condition is imposed") {
  const ProblemSetup setup{Vec3(199, 1, 0), chebyshev_grid(100, 10.0), {}};
  const auto alpha = constant(Vec3(0.03, 0.6, 0.0));
  const auto s = solve_state(alpha, setup.rho0, setup.grid);
  // The adjoint samples the integrator's dense output, so the target is the
  // same cubic Hermite on the accepted steps.
  const auto& fine = s.step_times();
  Eigen::MatrixXd v(3, static_cast<Eigen::Index>(fine.size())), d(3, v.cols());
  for (std::size_t k = 0; k < fine.size(); ++k) {
    v.col(static_cast<Eigen::Index>(k)) = s.at(fine[k]);
    d.col(static_cast<Eigen::Index>(k)) = state_rhs(s.at(fine[k]), Vec3(0.03, 0.6, 0.0));
  }
  const auto adj = solve_adjoint(s, alpha, Interpolant::cubic_hermite(fine, v, d), Vec3::Zero());
  CHECK(adj.q.cwiseAbs().maxCoeff() <= 1e-6);

  // Shift the target so that rho(T) - target(T) = (0.1, 0, 0).
  Eigen::MatrixXd shifted = s.rho();
  shifted.row(0).array() -= 0.1;
  const auto itp = Interpolant::cubic_hermite(s.grid().nodes(), shifted, s.rho_dot());
  const auto q = solve_adjoint(s, alpha, itp, Vec3::Ones());
  CHECK((q.terminal() - Vec3(0.1, 0, 0)).norm() <= 1e-12);
}

TEST_CASE("adjoint multiplier matches difference quotients in the initial state") {
  // dJ/drho0 = q(0) for J = int 1/2 |rho - target|^2 and q(T) = 0.
  const auto alpha = constant(Vec3(0.02, 0.5, 0.1));
  const TimeGrid grid = chebyshev_grid(200, 4.0);
  const Vec3 rho0(94, 5, 1);
  const auto ref = solve_state(constant(Vec3(0.025, 0.4, 0.05)), rho0, grid);
  const Target target{ref.interpolant(), TargetSource::Synthetic};

  auto tracking = [&](const Vec3& r0) {
    const ReducedObjective obj(alpha, target, ObjectiveSpec::r1(), {r0, grid, {}});
    return obj.evaluate(alpha, false).tracking;
  };
  const auto s = solve_state(alpha, rho0, grid);
  const Vec3 q0 = solve_adjoint(s, alpha, target.itp, Vec3::Zero()).multiplier();
  for (int i = 0; i < 3; ++i) {
    const double h = 1e-4;
    Vec3 p = rho0, m = rho0;
    p[i] += h;
    m[i] -= h;
    const double fd = (tracking(p) - tracking(m)) / (2 * h);
    CHECK(q0[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("adjoint obeys the logarithmic-norm bound") {
  const Vec3 a(0.03, 0.6, 0.0);
  const auto alpha = constant(a);
  const TimeGrid grid = chebyshev_grid(200, 10.0);
  const Vec3 rho0(199, 1, 0);
  const auto s = solve_state(alpha, rho0, grid);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 2);
  const auto target = Interpolant::linear({0.0, 10.0}, zero);
  const auto adj = solve_adjoint(s, alpha, target, Vec3::Zero());

  std::vector<double> source(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) source[k] = s.rho().col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff();
  const double integral = simpson_integrate(grid.span(), source);
  const double n = rho0.sum();
  const double bound = std::exp((2 * n * a[0] + 2 * a[1] + a[2]) * 10.0) * integral;
  CHECK(std::isfinite(adj.q.cwiseAbs().maxCoeff()));
  CHECK(adj.q.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("basic reproduction number and elasticities") {
  CHECK(basic_reproduction_number(Vec3(0.03, 0.6, 0), 200) == doctest::Approx(10.0));
  CHECK(basic_reproduction_number(Vec3(0.0, 0.6, 0), 200) == 0.0);
  CHECK(basic_reproduction_number(Vec3(0.07, 0.1, 0.05), 400) == doctest::Approx(186.6666666667));
  CHECK_THROWS_AS(basic_reproduction_number(Vec3(0.1, 0, 0), 10), ConfigError);

  const Vec3 e1 = sensitivity_indices(Vec3(0.03, 0.6, 0));
  CHECK((e1 - Vec3(1, -1, 0)).norm() <= 1e-15);
  const Vec3 e2 = sensitivity_indices(Vec3(0.07, 0.1, 0.05));
  CHECK((e2 - Vec3(1, -2.0 / 3, -1.0 / 3)).norm() <= 1e-15);
  const Vec3 e3 = sensitivity_indices(Vec3(0.2, 0.3, 0.3));
  CHECK((e3 - Vec3(1, -0.5, -0.5)).norm() <= 1e-15);
  CHECK_THROWS_AS(sensitivity_indices(Vec3(0.1, 0, 0)), ConfigError);
}
