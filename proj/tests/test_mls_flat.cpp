#include "doctest.h"
#include "test_support.hpp"

#include "mmls/error.hpp"
#include "mmls/mls_flat.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mmls;

namespace {

double monomial(const Eigen::VectorXd& x, const std::vector<int>& alpha) {
  double v = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) v *= std::pow(x(static_cast<Index>(j)), alpha[j]);
  return v;
}

PointCloud scattered_sites(int d, Index n, std::uint64_t seed) {
  auto c = mmls::testing::uniform_cube(d, n, seed);
  c.coords().array() = c.coords().array() * 2.0 - 1.0;
  return c;
}

struct SinLevel {
  double h;
  double value_error;
  double derivative_error;
};

SinLevel sin_level(Index n, int degree) {
  const double two_pi = 2.0 * std::numbers::pi;
  PointCloud sites(1, n);
  Eigen::MatrixXd values(1, n);
  for (Index i = 0; i < n; ++i) {
    sites.coords()(0, i) = two_pi * static_cast<double>(i) / static_cast<double>(n - 1);
    values(0, i) = std::sin(sites.coords()(0, i));
  }
  const double h = two_pi / static_cast<double>(n - 1);
  SinLevel level{h, 0.0, 0.0};
  const Eigen::VectorXd dir = Eigen::VectorXd::Ones(1);
  for (int t = 0; t <= 200; ++t) {
    Eigen::VectorXd x(1);
    x(0) = two_pi * t / 200.0;
    const auto fit = mls_fit(sites, values, x, degree, WeightProfile::bump(), h);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    level.value_error = std::max(level.value_error, std::abs(mls_eval(fit, zero)(0) - std::sin(x(0))));
    level.derivative_error =
        std::max(level.derivative_error, std::abs(mls_directional_derivative(fit, dir, zero)(0) - std::cos(x(0))));
  }
  return level;
}

}  // namespace

TEST_CASE("monomial tables") {
  CHECK(monomial_count(1, 3) == 4);
  CHECK(monomial_count(2, 2) == 6);
  CHECK(monomial_count(3, 0) == 1);
  const auto e = graded_lex_exponents(2, 2);
  REQUIRE(e.size() == 6);
  CHECK(e[0] == std::vector<int>{0, 0});
  CHECK(e[1] == std::vector<int>{1, 0});
  CHECK(e[2] == std::vector<int>{0, 1});
  CHECK(e[3] == std::vector<int>{2, 0});
  CHECK(e[4] == std::vector<int>{1, 1});
  CHECK(e[5] == std::vector<int>{0, 2});
}

TEST_CASE("vector polynomial evaluation") {
  VectorPolynomial p(2, 3, 2, 0.5);
  CHECK(p.coefficients().rows() == 6);
  CHECK(p.coefficients().cols() == 3);
  p.coefficients().setRandom();
  CHECK((p.evaluate(Eigen::Vector2d::Zero()) - p.coefficients().row(0).transpose()).norm() == 0.0);
  // u = x / scale, so x = (0.5, 0) gives u_1 = 1.
  const Eigen::VectorXd at = p.evaluate(Eigen::Vector2d(0.5, 0.0));
  const Eigen::VectorXd expect =
      (p.coefficients().row(0) + p.coefficients().row(1) + p.coefficients().row(3)).transpose();
  CHECK((at - expect).norm() < 1e-14);
}

TEST_CASE("reproduces every monomial up to the fitted degree") {
  for (int d : {1, 2, 3}) {
    for (int degree : {0, 1, 2, 3}) {
      const Index needed = monomial_count(d, degree);
      const PointCloud sites = scattered_sites(d, 40 * needed, 11 + static_cast<std::uint64_t>(d * 10 + degree));
      const auto exps = graded_lex_exponents(d, degree);
      Eigen::MatrixXd values(static_cast<Index>(exps.size()), sites.size());
      for (Index i = 0; i < sites.size(); ++i)
        for (std::size_t t = 0; t < exps.size(); ++t)
          values(static_cast<Index>(t), i) = monomial(sites.point(i), exps[t]);
      const Eigen::VectorXd center = Eigen::VectorXd::Constant(d, 0.1);
      const auto fit = mls_fit(sites, values, center, degree, WeightProfile::bump(), 0.6);
      for (const Eigen::VectorXd offset :
           {Eigen::VectorXd(Eigen::VectorXd::Zero(d)), Eigen::VectorXd(Eigen::VectorXd::Constant(d, 0.13))}) {
        const Eigen::VectorXd got = mls_eval(fit, offset);
        for (std::size_t t = 0; t < exps.size(); ++t) {
          const double want = monomial(center + offset, exps[t]);
          CHECK(std::abs(got(static_cast<Index>(t)) - want) <= 1e-9 * std::max(1.0, std::abs(want)));
        }
      }
    }
  }
}

TEST_CASE("constant and linear data") {
  const PointCloud sites = scattered_sites(2, 60, 3);
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(1, sites.size(), 3.0);
  const Eigen::VectorXd c = Eigen::Vector2d(0.2, -0.1);
  const auto f0 = mls_fit(sites, constant, c, 0, WeightProfile::bump(), 0.5);
  CHECK(mls_eval(f0, Eigen::Vector2d(0.3, 0.4))(0) == doctest::Approx(3.0).epsilon(1e-13));
  const auto f2 = mls_fit(sites, constant, c, 2, WeightProfile::bump(), 0.5);
  CHECK(std::abs(mls_directional_derivative(f2, Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d::Zero())(0)) < 1e-10);

  PointCloud line(1, 30);
  Eigen::MatrixXd lin(1, 30);
  for (Index i = 0; i < 30; ++i) {
    line.coords()(0, i) = 0.1 * static_cast<double>(i);
    lin(0, i) = 2.0 * line.coords()(0, i);
  }
  const auto f1 = mls_fit(line, lin, Eigen::VectorXd::Constant(1, 1.0), 1, WeightProfile::bump(), 0.1);
  for (double off : {-0.3, 0.0, 0.25}) {
    CHECK(mls_eval(f1, Eigen::VectorXd::Constant(1, off))(0) == doctest::Approx(2.0 * (1.0 + off)).epsilon(1e-12));
    CHECK(mls_directional_derivative(f1, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, off))(0) ==
          doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud sites = scattered_sites(2, 80, 100 + static_cast<std::uint64_t>(trial));
    Eigen::MatrixXd values(2, sites.size());
    for (Index i = 0; i < sites.size(); ++i) {
      const auto x = sites.point(i);
      values(0, i) = std::sin(2.0 * x(0)) * std::cos(x(1));
      values(1, i) = std::exp(0.5 * x(0) - x(1));
    }
    const Eigen::Vector2d center(0.3 * g(rng) * 0.5, 0.3 * g(rng) * 0.5);
    const auto fit = mls_fit(sites, values, center, 3, WeightProfile::bump(), 0.5);
    Eigen::Vector2d dir(g(rng), g(rng));
    dir.normalize();
    const Eigen::Vector2d off(0.05 * g(rng), 0.05 * g(rng));
    const double step = 1e-4;
    const Eigen::VectorXd fd =
        (mls_eval(fit, off + step * dir) - mls_eval(fit, off - step * dir)) / (2.0 * step);
    CHECK((mls_directional_derivative(fit, dir, off) - fd).norm() < 1e-6);
  }
}

TEST_CASE("joint fit equals coordinate-wise fits") {
  const PointCloud sites = scattered_sites(2, 70, 21);
  Eigen::MatrixXd values(3, sites.size());
  for (Index i = 0; i < sites.size(); ++i) {
    const auto x = sites.point(i);
    values.col(i) << std::cos(x(0)), x(0) * x(1) * x(1), std::exp(x(1));
  }
  const Eigen::Vector2d c(0.1, 0.2);
  const auto joint = mls_fit(sites, values, c, 2, WeightProfile::bump(), 0.6);
  for (Index l = 0; l < 3; ++l) {
    const auto single = mls_fit(sites, values.row(l), c, 2, WeightProfile::bump(), 0.6);
    CHECK((joint.polynomial.coefficients().col(l) - single.polynomial.coefficients().col(0)).norm() < 1e-12);
  }
}

TEST_CASE("interpolatory weights reproduce site values") {
  const PointCloud sites = scattered_sites(2, 50, 8);
  Eigen::MatrixXd values(1, sites.size());
  for (Index i = 0; i < sites.size(); ++i) values(0, i) = std::sin(3.0 * sites.point(i)(0)) + sites.point(i)(1);
  for (Index i : {0, 7, 23}) {
    const auto fit = mls_fit(sites, values, sites.point(i), 2, WeightProfile::interpolatory(), 0.5);
    const double v = mls_eval(fit, Eigen::Vector2d::Zero())(0);
    CHECK(std::abs(v - values(0, i)) <= 1e-6 * std::max(1.0, std::abs(values(0, i))));
  }
}

TEST_CASE("fit errors") {
  const PointCloud sites = mmls::testing::line_cloud({0.0, 1.0, 2.0});
  const Eigen::MatrixXd values = Eigen::MatrixXd::Ones(1, 3);
  // Three sites cannot determine a cubic.
  CHECK_THROWS_WITH_AS(mls_fit(sites, values, Eigen::VectorXd::Constant(1, 1.0), 3, WeightProfile::bump(), 1.0),
                       doctest::Contains("unisolvency"), NumericalError);
  CHECK_THROWS_WITH_AS(mls_fit(sites, values, Eigen::VectorXd::Constant(1, 50.0), 1, WeightProfile::bump(), 1.0),
                       doctest::Contains("empty support"), NumericalError);
  const PointCloud colinear = PointCloud::from_rows({{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}});
  CHECK_THROWS_AS(mls_fit(colinear, Eigen::MatrixXd::Ones(1, 6), Eigen::Vector2d(2, 2), 1, WeightProfile::bump(), 2.0),
                  NumericalError);
  const auto fit = mls_fit(mmls::testing::line_cloud({0, 1, 2, 3}), Eigen::MatrixXd::Ones(1, 4),
                           Eigen::VectorXd::Constant(1, 1.5), 1, WeightProfile::bump(), 1.0);
  CHECK_THROWS_AS(mls_directional_derivative(fit, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)),
                  ValidationError);
}

TEST_CASE("fit metadata") {
  const PointCloud sites = mmls::testing::line_cloud({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto fit = mls_fit(sites, Eigen::MatrixXd::Ones(1, 10), Eigen::VectorXd::Constant(1, 4.0), 2,
                           WeightProfile::bump(), 1.0);
  CHECK(fit.neighbor_indices.size() >= 3);
  for (Index i : fit.neighbor_indices) CHECK(std::abs(sites.point(i)(0) - 4.0) < 3.5);
  CHECK(fit.effective_weight_sum > 1.0);
  CHECK(fit.condition_estimate >= 1.0);
}

TEST_CASE("sin convergence rates for degree 2") {
  std::vector<double> hs, ev, dv;
  for (Index n : {26, 51, 101, 201}) {
    const auto l = sin_level(n, 2);
    hs.push_back(l.h);
    ev.push_back(l.value_error);
    dv.push_back(l.derivative_error);
  }
  CHECK(mmls::testing::loglog_slope(hs, ev) >= 2.65);
  CHECK(mmls::testing::loglog_slope(hs, dv) >= 1.65);
}
