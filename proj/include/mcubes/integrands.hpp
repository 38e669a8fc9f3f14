// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcubes {

/**
 * A ready-to-integrate function: the callable, its box, and (when known) the
 * exact value of its integral for accuracy reporting.  The callable must be
 * deterministic and safe for concurrent invocation.
 */
struct IntegrandSpec {
  std::string name;
  std::uint32_t dims = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<double(std::span<const double>)> evaluate;
  std::optional<double> reference;  ///< exact integral over the box, when known

  double operator()(std::span<const double> x) const { return evaluate(x); }
};

namespace detail {

/// prod_j integral_0^1 e^(i a_j x) dx = prod_j (e^(i a_j) - 1)/(i a_j),
/// scaled to an upper limit h: integral_0^h e^(i x) dx = (e^(i h) - 1)/i.
inline std::complex<double> phase_factor(double a) {
  const std::complex<double> i(0.0, 1.0);
  return (std::exp(i * a) - 1.0) / (i * a);
}

}  // namespace detail

/**
 * Exact integral of suite family `family` in dimension d over [0,1]^d.
 *
 * Closed forms: oscillatory families via complex exponentials, product
 * families via their per-axis antiderivatives, and the corner peak via
 * inclusion-exclusion over the axes.  The unit tests cross-check every one
 * of these against an independent adaptive quadrature oracle.
 */
inline double reference_value(int family, std::uint32_t d) {
  if (d < 1) throw std::invalid_argument("reference_value: d must be >= 1");
  switch (family) {
    case 1: {
      std::complex<double> prod = 1.0;
      for (std::uint32_t i = 1; i <= d; ++i)
        prod *= detail::phase_factor(static_cast<double>(i));
      return prod.real();
    }
    case 2:
      // per axis: (2/a) atan(1/(2a)) with a = 1/50
      return std::pow(100.0 * std::atan(25.0), static_cast<double>(d));
    case 3: {
      // corner peak: inclusion-exclusion, coefficients a_i = i
      double sum = 0.0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        double denom = 1.0;
        int bits = 0;
        for (std::uint32_t i = 0; i < d; ++i)
          if (mask & (std::uint64_t{1} << i)) {
            denom += static_cast<double>(i + 1);
            ++bits;
          }
        sum += (bits % 2 ? -1.0 : 1.0) / denom;
      }
      double fact_prod = 1.0;  // d! * prod(a_i) = d! * d!
      for (std::uint32_t i = 1; i <= d; ++i)
        fact_prod *= static_cast<double>(i) * static_cast<double>(i);
      return sum / fact_prod;
    }
    case 4:
      // per axis: (sqrt(pi)/25) erf(12.5)
      return std::pow(std::sqrt(std::numbers::pi) / 25.0 * std::erf(12.5),
                      static_cast<double>(d));
    case 5:
      // per axis: (1 - e^-5)/5
      return std::pow((1.0 - std::exp(-5.0)) / 5.0, static_cast<double>(d));
    case 6: {
      // per axis i (1-based): (e^((i+4) u_i) - 1)/(i+4), u_i = min(1, (3+i)/10)
      double prod = 1.0;
      for (std::uint32_t i = 1; i <= d; ++i) {
        const double c = static_cast<double>(i) + 4.0;
        const double u = std::min(1.0, (3.0 + static_cast<double>(i)) / 10.0);
        prod *= (std::exp(c * u) - 1.0) / c;
      }
      return prod;
    }
    default:
      throw std::invalid_argument("reference_value: unknown family " + std::to_string(family));
  }
}

/// Suite integrand `family` in dimension d on the unit hyper-cube, with its
/// reference value attached.
inline IntegrandSpec make_suite_integrand(int family, std::uint32_t d) {
  if (family < 1 || family > 6)
    throw std::invalid_argument("make_suite_integrand: family must be in 1..6");
  if (d < 1) throw std::invalid_argument("make_suite_integrand: d must be >= 1");

  IntegrandSpec spec;
  spec.name = "f" + std::to_string(family);
  spec.dims = d;
  spec.lower.assign(d, 0.0);
  spec.upper.assign(d, 1.0);
  spec.reference = reference_value(family, d);
  switch (family) {
    case 1:
      spec.evaluate = [](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
          s += static_cast<double>(i + 1) * x[i];
        return std::cos(s);
      };
      break;
    case 2:
      spec.evaluate = [](std::span<const double> x) {
        double prod = 1.0;
        for (const double xi : x) {
          const double t = xi - 0.5;
          prod *= 1.0 / (1.0 / 2500.0 + t * t);
        }
        return prod;
      };
      break;
    case 3:
      spec.evaluate = [d](std::span<const double> x) {
        double s = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i)
          s += static_cast<double>(i + 1) * x[i];
        return std::pow(s, -static_cast<double>(d) - 1.0);
      };
      break;
    case 4:
      spec.evaluate = [](std::span<const double> x) {
        double s = 0.0;
        for (const double xi : x) {
          const double t = xi - 0.5;
          s += t * t;
        }
        return std::exp(-625.0 * s);
      };
      break;
    case 5:
      spec.evaluate = [](std::span<const double> x) {
        double s = 0.0;
        for (const double xi : x) s += std::abs(xi - 0.5);
        return std::exp(-10.0 * s);
      };
      break;
    case 6:
      spec.evaluate = [](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double bound = (3.0 + static_cast<double>(i + 1)) / 10.0;
          if (!(x[i] < bound)) return 0.0;
          s += (static_cast<double>(i + 1) + 4.0) * x[i];
        }
        return std::exp(s);
      };
      break;
    default:;  // unreachable, family validated above
  }
  return spec;
}

/// sin of the coordinate sum over (0,10)^6; the published benchmark value
/// is -49.165073, and the attached reference is the closed form
/// Im[((e^(10i) - 1)/i)^6], which agrees with it to printed precision.
inline IntegrandSpec make_fA() {
  IntegrandSpec spec;
  spec.name = "fA";
  spec.dims = 6;
  spec.lower.assign(6, 0.0);
  spec.upper.assign(6, 10.0);
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> axis = (std::exp(10.0 * i) - 1.0) / i;
  spec.reference = std::pow(axis, 6).imag();
  spec.evaluate = [](std::span<const double> x) {
    double s = 0.0;
    for (const double xi : x) s += xi;
    return std::sin(s);
  };
  return spec;
}

/// Normalized Gaussian (variance 0.01 per axis) on (-1,1)^9; integral 1.0 to
/// double precision since the box holds all but ~1e-22 of the mass.
inline IntegrandSpec make_fB() {
  IntegrandSpec spec;
  spec.name = "fB";
  spec.dims = 9;
  spec.lower.assign(9, -1.0);
  spec.upper.assign(9, 1.0);
  const double sigma2 = 0.01;
  const double norm = std::pow(2.0 * std::numbers::pi * sigma2, -4.5);
  spec.reference = std::pow(std::erf(1.0 / std::sqrt(2.0 * sigma2)), 9.0);
  spec.evaluate = [norm, sigma2](std::span<const double> x) {
    double s = 0.0;
    for (const double xi : x) s += xi * xi;
    return norm * std::exp(-s / (2.0 * sigma2));
  };
  return spec;
}

/**
 * Look up an integrand by CLI name: "f1".."f6" (dimension required) or
 * "fA"/"fB" (fixed dimension; pass 0 or their own dimension).
 */
inline IntegrandSpec make_integrand(std::string_view id, std::uint32_t dims) {
  if (id == "fA" || id == "fB") {
    IntegrandSpec spec = id == "fA" ? make_fA() : make_fB();
    if (dims != 0 && dims != spec.dims)
      throw std::invalid_argument(std::string(id) + " is fixed at " +
                                  std::to_string(spec.dims) + " dimensions");
    return spec;
  }
  if (id.size() == 2 && id[0] == 'f' && id[1] >= '1' && id[1] <= '6') {
    if (dims == 0)
      throw std::invalid_argument(std::string(id) + " requires an explicit dimension");
    return make_suite_integrand(id[1] - '0', dims);
  }
  throw std::invalid_argument("unknown integrand \"" + std::string(id) + "\"");
}

}  // namespace mcubes
