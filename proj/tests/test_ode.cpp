#include <doctest.h>

#include <cmath>
#include <vector>

#include "sird/discretization.hpp"
#include "sird/errors.hpp"
#include "sird/ode.hpp"

using sird::ode::IvpProblem;
using sird::ode::Vector;

namespace {

IvpProblem sird_problem(double beta, double gamma, double m, Vector y0, double t_end) {
  IvpProblem p;
  p.rhs = [=](double, const Vector& y, Vector& f) {
    const double inf = beta * y[0] * y[1];
    f[0] = -inf;
    f[1] = inf - gamma * y[1] - m * y[1];
    f[2] = gamma * y[1];
  };
  p.y0 = std::move(y0);
  p.t_end = t_end;
  return p;
}

IvpProblem decay(double rel, double abs) {
  IvpProblem p;
  p.rhs = [](double, const Vector& y, Vector& f) { f = -y; };
  p.y0 = Vector::Ones(1);
  p.t_end = 1.0;
  p.tol = {rel, abs};
  return p;
}

}  // namespace

TEST_CASE("zero dynamics keep the initial state") {
  IvpProblem p;
  p.rhs = [](double, const Vector&, Vector& f) { f.setZero(); };
  p.y0 = Vector{{1.0, 2.0, 3.0}};
  p.t_end = 10.0;
  const auto path = sird::ode::integrate(p);
  CHECK(path.nodes.front() == 0.0);
  CHECK(path.nodes.back() == 10.0);
  for (const auto& v : path.values) CHECK((v - p.y0).norm() == 0.0);
}

TEST_CASE("exponential decay hits e^-1 within the tolerance budget") {
  const auto p = decay(1e-3, 1e-6);
  const auto path = sird::ode::integrate(p);
  CHECK(std::abs(path.values.back()[0] - std::exp(-1.0)) <= 10.0 * (1e-3 + 1e-6));
}

TEST_CASE("halving tolerances does not increase the error") {
  // Starts at the default tolerances; looser settings take only two steps.
  double rel = 1e-3, abs = 1e-6;
  double previous = std::abs(sird::ode::integrate(decay(rel, abs)).values.back()[0] - std::exp(-1.0));
  for (int i = 0; i < 20; ++i) {
    rel *= 0.5;
    abs *= 0.5;
    const double err =
        std::abs(sird::ode::integrate(decay(rel, abs)).values.back()[0] - std::exp(-1.0));
    CHECK(err <= previous * (1.0 + 1e-12));
    previous = err;
  }
}

TEST_CASE("path invariants: endpoints, first value, exact derivatives") {
  auto p = sird_problem(0.03, 0.6, 0.0, Vector{{199.0, 1.0, 0.0}}, 10.0);
  const auto path = sird::ode::integrate(p);
  REQUIRE(path.nodes.size() == path.values.size());
  REQUIRE(path.nodes.size() == path.derivs.size());
  CHECK(path.values.front() == p.y0);
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (i > 0) CHECK(path.nodes[i] > path.nodes[i - 1]);
    Vector f(3);
    p.rhs(path.nodes[i], path.values[i], f);
    CHECK((f - path.derivs[i]).norm() == 0.0);
  }
  CHECK(path.stats.accepted + 1 == path.nodes.size());
}

TEST_CASE("SIRD susceptible count at t = 10 matches a tight reference") {
  // Reference from an independent 8th-order integration at rtol 1e-13.
  constexpr double kRhoS = 0.009464849125749348;
  constexpr double kRhoI = 0.921029962878976;
  constexpr double kRhoR = 199.0695051879952;
  auto p = sird_problem(0.03, 0.6, 0.0, Vector{{199.0, 1.0, 0.0}}, 10.0);
  p.tol = {1e-12, 1e-14};
  const auto y = sird::ode::integrate(p).values.back();
  CHECK(y[0] == doctest::Approx(kRhoS).epsilon(1e-8));
  CHECK(y[1] == doctest::Approx(kRhoI).epsilon(1e-8));
  CHECK(y[2] == doctest::Approx(kRhoR).epsilon(1e-10));

  p.tol = {1e-3, 1e-6};
  const auto coarse = sird::ode::integrate(p).values.back();
  CHECK(std::abs(coarse[0] - kRhoS) < 1e-3);
}

TEST_CASE("sampling reproduces nodes and is exact on cubics") {
  IvpProblem p;
  p.rhs = [](double t, const Vector&, Vector& f) { f[0] = 3.0 * t * t; };
  p.y0 = Vector::Zero(1);
  p.t_end = 2.0;
  const auto path = sird::ode::integrate(p);
  const auto at_nodes = sird::ode::sample(path, path.nodes);
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    CHECK(at_nodes(0, static_cast<Eigen::Index>(i)) == path.values[i][0]);
  }
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(2.0 * i / 40.0);
  const auto s = sird::ode::sample(path, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(s(0, static_cast<Eigen::Index>(i)) ==
          doctest::Approx(grid[i] * grid[i] * grid[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("sampling outside the span is rejected") {
  auto path = sird::ode::integrate(decay(1e-3, 1e-6));
  const std::vector<double> bad{1.5};
  CHECK_THROWS_AS(sird::ode::sample(path, bad), std::out_of_range);
  const std::vector<double> neg{-0.1};
  CHECK_THROWS_AS(sird::ode::sample(path, neg), std::out_of_range);
}

TEST_CASE("sampling is linear in the stored values") {
  auto p = sird_problem(0.03, 0.6, 0.0, Vector{{199.0, 1.0, 0.0}}, 10.0);
  auto path = sird::ode::integrate(p);
  const auto grid = sird::chebyshev_grid(50, 10.0);
  const Eigen::MatrixXd base = sird::ode::sample(path, grid.span());
  const double c = -2.5;
  for (auto& v : path.values) v *= c;
  for (auto& d : path.derivs) d *= c;
  const Eigen::MatrixXd scaled = sird::ode::sample(path, grid.span());
  CHECK((scaled - c * base).cwiseAbs().maxCoeff() <= 1e-12 * base.cwiseAbs().maxCoeff());
}

TEST_CASE("dense samples agree with restarted integrations") {
  const double n = 200.0;
  auto p = sird_problem(0.03, 0.6, 0.0, Vector{{199.0, 1.0, 0.0}}, 10.0);
  p.tol = {1e-10, 1e-10};
  const auto path = sird::ode::integrate(p);
  const auto grid = sird::chebyshev_grid(200, 10.0);
  const Eigen::MatrixXd s = sird::ode::sample(path, grid.span());
  double worst = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    auto q = p;
    q.t_end = grid[i];
    const Vector direct = sird::ode::integrate(q).values.back();
    worst = std::max(worst, (s.col(static_cast<Eigen::Index>(i)) - direct).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-6 * n);
}

TEST_CASE("forward then reversed integration returns to the start") {
  const double rel = 1e-6, abs = 1e-8;
  auto p = sird_problem(0.03, 0.6, 0.0, Vector{{199.0, 1.0, 0.0}}, 2.0);
  p.tol = {rel, abs};
  const Vector end = sird::ode::integrate(p).values.back();

  IvpProblem back;
  back.rhs = [&](double tau, const Vector& y, Vector& f) {
    p.rhs(2.0 - tau, y, f);
    f = -f;
  };
  back.y0 = end;
  back.t_end = 2.0;
  back.tol = {rel, abs};
  const Vector start = sird::ode::integrate(back).values.back();
  CHECK((start - p.y0).norm() <= 100.0 * (abs + rel) * p.y0.norm());
}

TEST_CASE("invalid problems and blow-up are reported") {
  IvpProblem p = decay(1e-3, 1e-6);
  p.t_end = 0.0;
  CHECK_THROWS_AS(sird::ode::integrate(p), std::invalid_argument);
  p = decay(-1.0, 1e-6);
  CHECK_THROWS_AS(sird::ode::integrate(p), std::invalid_argument);

  // y' = y^2 with y(0) = 1 blows up at t = 1.
  IvpProblem blow;
  blow.rhs = [](double, const Vector& y, Vector& f) { f[0] = y[0] * y[0]; };
  blow.y0 = Vector::Ones(1);
  blow.t_end = 2.0;
  try {
    sird::ode::integrate(blow);
    FAIL("expected a numerical failure");
  } catch (const sird::NumericalError& e) {
    CHECK(e.last_time() > 0.9);
    CHECK(e.last_time() < 1.0 + 1e-6);
  }
}
