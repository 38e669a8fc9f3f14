// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "mcubes/integrands.hpp"

#include "support.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace mcubes;
using testsupport::quad_1d;
using testsupport::tensor_gauss;

namespace {

double eval(const IntegrandSpec& s, std::initializer_list<double> pt) {
  const std::vector<double> x(pt);
  return s(std::span<const double>(x));
}

}  // namespace

TEST_CASE("suite integrands match hand-computed point values") {
  CHECK(eval(make_suite_integrand(1, 3), {0.0, 0.0, 0.0}) == 1.0);  // cos(0)
  CHECK(eval(make_suite_integrand(4, 2), {0.5, 0.5}) == 1.0);       // exp(0)
  CHECK(eval(make_suite_integrand(5, 4), {0.5, 0.5, 0.5, 0.5}) == 1.0);
  // the rational peak attains height 2500 per axis at the center
  CHECK_THAT(eval(make_suite_integrand(2, 2), {0.5, 0.5}), WithinRel(2500.0 * 2500.0, 1e-12));
  // corner peak at (1,1) in 2D: (1 + 1 + 2)^-3
  CHECK_THAT(eval(make_suite_integrand(3, 2), {1.0, 1.0}), WithinRel(1.0 / 64.0, 1e-12));
}

TEST_CASE("product-family references agree with independent 1D quadrature") {
  struct Axis {
    int family;
    std::function<double(double)> f;
  };
  const Axis axes[] = {
      {2, [](double x) { return 1.0 / (1.0 / 2500.0 + (x - 0.5) * (x - 0.5)); }},
      {4, [](double x) { return std::exp(-625.0 * (x - 0.5) * (x - 0.5)); }},
      {5, [](double x) { return std::exp(-10.0 * std::abs(x - 0.5)); }},
  };
  for (const auto& ax : axes) {
    const double one_axis = quad_1d(ax.f, 0.0, 1.0);
    for (std::uint32_t d : {1u, 2u, 3u, 6u, 8u}) {
      INFO("family " << ax.family << " dims " << d);
      CHECK_THAT(reference_value(ax.family, d),
                 WithinRel(std::pow(one_axis, static_cast<double>(d)), 1e-9));
    }
  }

  // family 6 has axis-specific factors and a truncated support
  for (std::uint32_t d : {1u, 2u, 3u, 6u, 8u}) {
    double prod = 1.0;
    for (std::uint32_t i = 1; i <= d; ++i) {
      const double c = static_cast<double>(i) + 4.0;
      const double u = std::min(1.0, (3.0 + static_cast<double>(i)) / 10.0);
      prod *= quad_1d([c](double x) { return std::exp(c * x); }, 0.0, u);
    }
    INFO("family 6 dims " << d);
    CHECK_THAT(reference_value(6, d), WithinRel(prod, 1e-9));
  }
}

TEST_CASE("non-separable references agree with tensor quadrature") {
  // oscillatory: cos(sum of i * x_i)
  CHECK(reference_value(1, 1) == std::sin(1.0));
  for (int d : {2, 3}) {
    const double q = tensor_gauss(
        [](const std::vector<double>& x) {
          double s = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * x[i];
          return std::cos(s);
        },
        d, 32);
    CHECK_THAT(reference_value(1, static_cast<std::uint32_t>(d)), WithinRel(q, 1e-10));
  }

  // corner peak: inclusion-exclusion vs direct quadrature
  CHECK(reference_value(3, 1) == 0.5);
  for (int d : {2, 3}) {
    const double q = tensor_gauss(
        [d](const std::vector<double>& x) {
          double s = 1.0;
          for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * x[i];
          return std::pow(s, -d - 1.0);
        },
        d, 40);
    CHECK_THAT(reference_value(3, static_cast<std::uint32_t>(d)), WithinRel(q, 1e-10));
  }
}

TEST_CASE("oscillatory benchmark carries its published reference") {
  const auto spec = make_fA();
  CHECK(spec.dims == 6);
  CHECK(spec.lower == std::vector<double>(6, 0.0));
  CHECK(spec.upper == std::vector<double>(6, 10.0));
  REQUIRE(spec.reference.has_value());
  CHECK_THAT(*spec.reference, WithinAbs(-49.165073, 1e-6));
  CHECK(eval(spec, {0, 0, 0, 0, 0, 0}) == 0.0);  // sin(0)
  // one full revolution of the phase: sin(2 pi) up to rounding
  const double two_pi = 2.0 * std::numbers::pi;
  CHECK_THAT(eval(spec, {two_pi, 0, 0, 0, 0, 0}), WithinAbs(0.0, 1e-14));
}

TEST_CASE("gaussian benchmark integrates to one over its box") {
  const auto spec = make_fB();
  CHECK(spec.dims == 9);
  CHECK(spec.lower == std::vector<double>(9, -1.0));
  CHECK(spec.upper == std::vector<double>(9, 1.0));
  REQUIRE(spec.reference.has_value());
  // the box holds all but ~1e-22 of the mass, so the reference collapses to
  // exactly 1.0 in double precision
  CHECK(*spec.reference == 1.0);
  // peak height is the normalization constant (2 pi sigma^2)^(-9/2)
  const double norm = std::pow(2.0 * std::numbers::pi * 0.01, -4.5);
  CHECK_THAT(eval(spec, {0, 0, 0, 0, 0, 0, 0, 0, 0}), WithinRel(norm, 1e-14));
  CHECK_THAT(norm, WithinRel(255970.89820277557, 1e-12));
  // one-axis mass cross-check: quadrature of the 1D marginal to the 9th power
  const double axis = quad_1d(
      [norm9 = std::pow(norm, 1.0 / 9.0)](double x) {
        return norm9 * std::exp(-x * x / 0.02);
      },
      -1.0, 1.0);
  CHECK_THAT(std::pow(axis, 9.0), WithinRel(1.0, 1e-9));
}

TEST_CASE("symmetric families are invariant under coordinate permutation") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int family : {2, 4, 5}) {
    const auto spec = make_suite_integrand(family, 5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(5);
      for (auto& v : x) v = unit(rng);
      std::vector<double> y = x;
      std::shuffle(y.begin(), y.end(), rng);
      const double fx = spec(std::span<const double>(x));
      const double fy = spec(std::span<const double>(y));
      INFO("family " << family << " trial " << trial);
      CHECK_THAT(fy, WithinRel(fx, 1e-12));
    }
  }
}

TEST_CASE("product families factor across axes") {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int family : {2, 4, 5}) {
    const auto d3 = make_suite_integrand(family, 3);
    const auto d1 = make_suite_integrand(family, 1);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(3);
      for (auto& v : x) v = unit(rng);
      const double joint = d3(std::span<const double>(x));
      const double split = eval(d1, {x[0]}) * eval(d1, {x[1]}) * eval(d1, {x[2]});
      CHECK_THAT(joint, WithinRel(split, 1e-12));
    }
  }
}

TEST_CASE("the discontinuous family cuts off strictly at its thresholds") {
  const auto spec = make_suite_integrand(6, 2);  // thresholds 0.4 and 0.5
  CHECK(eval(spec, {0.5, 0.1}) == 0.0);                     // first axis out
  CHECK(eval(spec, {0.1, 0.6}) == 0.0);                     // second axis out
  CHECK(eval(spec, {0.4, 0.1}) == 0.0);                     // boundary excluded
  CHECK(eval(spec, {0.1, 0.5}) == 0.0);
  CHECK_THAT(eval(spec, {0.39, 0.49}),
             WithinRel(std::exp(5.0 * 0.39 + 6.0 * 0.49), 1e-12));
  // beyond axis 6 the threshold passes 1.0 and the support fills the cube
  const auto wide = make_suite_integrand(6, 8);
  std::vector<double> near_one(8, 0.01);
  near_one[6] = 0.99;
  near_one[7] = 0.99;
  CHECK(wide(std::span<const double>(near_one)) > 0.0);
}

TEST_CASE("integrand lookup validates names and dimensions") {
  CHECK(make_integrand("f3", 4).dims == 4);
  CHECK(make_integrand("fA", 0).dims == 6);
  CHECK(make_integrand("fA", 6).dims == 6);
  CHECK(make_integrand("fB", 0).dims == 9);
  CHECK(make_integrand("fB", 9).name == "fB");
  CHECK_THROWS_AS(make_integrand("f1", 0), std::invalid_argument);
  CHECK_THROWS_AS(make_integrand("fA", 3), std::invalid_argument);
  CHECK_THROWS_AS(make_integrand("fB", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_integrand("f7", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_integrand("g1", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_integrand("", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_suite_integrand(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_suite_integrand(7, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_suite_integrand(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(reference_value(9, 1), std::invalid_argument);
  CHECK_THROWS_AS(reference_value(1, 0), std::invalid_argument);
}
