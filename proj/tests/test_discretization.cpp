#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sird/discretization.hpp"
#include "sird/errors.hpp"

using sird::Interpolant;

namespace {

Eigen::MatrixXd row(const std::vector<double>& v) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

}  // namespace

TEST_CASE("chebyshev grid closed forms") {
  const auto g2 = sird::chebyshev_grid(2, 2.0);
  REQUIRE(g2.size() == 4);
  CHECK(g2[0] == 0.0);
  CHECK(g2[1] == doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-15));
  CHECK(g2[2] == doctest::Approx(1.0 + std::sqrt(2.0) / 2.0).epsilon(1e-15));
  CHECK(g2[3] == 2.0);

  const auto g1 = sird::chebyshev_grid(1, 1.0);
  REQUIRE(g1.size() == 3);
  CHECK(g1[1] == 0.5);

  const auto g = sird::chebyshev_grid(200, 10.0);
  CHECK(g.size() == 202);
  CHECK(g.kind() == sird::GridKind::ChebyshevFirstKindPlusEndpoints);
  CHECK_THROWS_AS(sird::chebyshev_grid(0, 1.0), sird::ConfigError);
  CHECK_THROWS_AS(sird::chebyshev_grid(3, 0.0), sird::ConfigError);
}

TEST_CASE("chebyshev nodes follow the cosine formula and are symmetric") {
  for (std::size_t n : {3u, 10u, 200u, 201u}) {
    const double T = 7.5;
    const auto g = sird::chebyshev_grid(n, T);
    std::vector<double> raw;
    for (std::size_t i = 0; i < n; ++i) {
      raw.push_back(0.5 * T * (1.0 + std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * n))));
    }
    std::sort(raw.begin(), raw.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(g[i + 1] == doctest::Approx(raw[i]).epsilon(1e-14));
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g[i] + g[g.size() - 1 - i] == doctest::Approx(T).epsilon(1e-15));
      if (i > 0) CHECK(g[i] > g[i - 1]);
    }
  }
}

TEST_CASE("uniform grid") {
  const auto g = sird::TimeGrid::uniform(4, 2.0);
  REQUIRE(g.size() == 5);
  CHECK(g[2] == 1.0);
  CHECK(g.horizon() == 2.0);
}

TEST_CASE("hermite interpolation is exact on cubics") {
  const auto g = sird::chebyshev_grid(7, 3.0);
  std::vector<double> v, d;
  for (double t : g.nodes()) {
    v.push_back(t * t * t);
    d.push_back(3.0 * t * t);
  }
  const auto itp = Interpolant::cubic_hermite(g.nodes(), row(v), row(d));
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double mid = 0.5 * (g[i] + g[i + 1]);
    CHECK(itp(mid)[0] == doctest::Approx(mid * mid * mid).epsilon(1e-13));
    CHECK(itp(g[i])[0] == v[i]);
  }
}

TEST_CASE("linear interpolation is exact on affine functions") {
  const std::vector<double> nodes{0.0, 0.3, 1.1, 2.0};
  std::vector<double> v;
  for (double t : nodes) v.push_back(2.0 * t + 1.0);
  const auto itp = Interpolant::linear(nodes, row(v));
  for (int i = 0; i <= 50; ++i) {
    const double t = 2.0 * i / 50.0;
    CHECK(itp(t)[0] == doctest::Approx(2.0 * t + 1.0).epsilon(1e-14));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) CHECK(itp(nodes[i])[0] == v[i]);
  CHECK_THROWS_AS(itp(2.5), std::out_of_range);
  CHECK_THROWS_AS(itp(-0.5), std::out_of_range);
}

TEST_CASE("piecewise constant takes the cell value on the left-closed cell") {
  const auto itp = Interpolant::piecewise_constant({0.0, 0.5, 1.0}, row({3.0, 7.0}));
  CHECK(itp(0.0)[0] == 3.0);
  CHECK(itp(0.25)[0] == 3.0);
  CHECK(itp(0.5)[0] == 7.0);
  CHECK(itp(0.75)[0] == 7.0);
  CHECK(itp(1.0)[0] == 7.0);
}

TEST_CASE("simpson rule examples") {
  const std::vector<double> u{0.0, 0.5, 1.0};
  const std::vector<double> sq{0.0, 0.25, 1.0};
  CHECK(sird::simpson_integrate(u, sq) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto g = sird::chebyshev_grid(200, 1.0);
  std::vector<double> one(g.size(), 1.0), s;
  CHECK(sird::simpson_integrate(g.span(), one) == doctest::Approx(1.0).epsilon(1e-14));
  for (double t : g.nodes()) s.push_back(std::sin(std::numbers::pi * t));
  CHECK(std::abs(sird::simpson_integrate(g.span(), s) - 2.0 / std::numbers::pi) <= 1e-8);

  const auto g10 = sird::chebyshev_grid(200, 10.0);
  std::vector<double> ones(g10.size(), 1.0);
  CHECK(sird::simpson_integrate(g10.span(), ones) == doctest::Approx(10.0).epsilon(1e-14));

  const std::vector<double> two{0.0, 1.0};
  CHECK_THROWS_AS(sird::simpson_integrate(two, two), sird::ConfigError);
}

TEST_CASE("simpson is exact on quadratics where a full parabola rule applies") {
  // Spacings within a factor of two of each other, even interval count.
  const std::vector<double> nodes{0.0, 0.2, 0.5, 0.8, 1.0};
  std::vector<double> v;
  for (double t : nodes) v.push_back(3.0 * t * t - t + 2.0);
  CHECK(sird::simpson_integrate(nodes, v) == doctest::Approx(1.0 - 0.5 + 2.0).epsilon(1e-14));
}

TEST_CASE("simpson weights are positive on every grid") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> gap(1e-3, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> nodes{0.0};
    const int n = 3 + trial % 40;
    for (int i = 1; i < n; ++i) nodes.push_back(nodes.back() + gap(rng));
    const auto w = sird::simpson_weights(nodes);
    CHECK(w.minCoeff() > 0.0);
    CHECK(w.sum() == doctest::Approx(nodes.back()).epsilon(1e-12));
  }
  const auto g = sird::chebyshev_grid(200, 3.0);
  CHECK(sird::simpson_weights(g.span()).minCoeff() > 0.0);
}

TEST_CASE("rolling average of constants and of the identity") {
  const auto c = Interpolant::linear({0.0, 2.0}, row({4.0, 4.0}));
  const auto rc = sird::rolling_average(c, 5);
  CHECK(rc.mode() == sird::InterpolationMode::PiecewiseConstantLeft);
  for (Eigen::Index j = 0; j < 5; ++j) CHECK(rc.values()(0, j) == doctest::Approx(4.0));

  const auto id = Interpolant::linear({0.0, 0.3, 1.0}, row({0.0, 0.3, 1.0}));
  const auto r = sird::rolling_average(id, 2);
  CHECK(r(0.25)[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r(0.75)[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r(1.0)[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(sird::rolling_average(id, 0), sird::ConfigError);
}

TEST_CASE("cell means of a hermite cubic are exact") {
  const std::vector<double> nodes{0.0, 0.4, 1.0, 3.0};
  std::vector<double> v, d;
  for (double t : nodes) {
    v.push_back(t * t * t);
    d.push_back(3.0 * t * t);
  }
  const auto itp = Interpolant::cubic_hermite(nodes, row(v), row(d));
  const auto r = sird::rolling_average(itp, 50);
  const double h = 3.0 / 50.0;
  for (int i = 0; i < 50; ++i) {
    const double a = i * h, b = (i + 1) * h;
    const double exact = (std::pow(b, 4) - std::pow(a, 4)) / (4.0 * h);
    CHECK(r.values()(0, i) == doctest::Approx(exact).epsilon(1e-13));
  }
}
