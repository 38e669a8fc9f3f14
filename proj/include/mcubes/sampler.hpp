// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mcubes/accumulators.hpp"
#include "mcubes/exact_sum.hpp"
#include "mcubes/grid.hpp"
#include "mcubes/rng.hpp"

namespace mcubes {

template <typename F>
concept Integrand = requires(const F& f, std::span<const double> x) {
  { f(x) } -> std::convertible_to<double>;
};

/// Thrown when f(x)*jacobian is not finite; carries the offending point.
class NonFiniteSample : public std::runtime_error {
 public:
  NonFiniteSample(std::vector<double> x, double fx)
      : std::runtime_error(describe(x, fx)), point_(std::move(x)), value_(fx) {}
  [[nodiscard]] const std::vector<double>& point() const { return point_; }
  [[nodiscard]] double value() const { return value_; }

 private:
  static std::string describe(const std::vector<double>& x, double fx) {
    std::ostringstream os;
    os << "integrand produced non-finite value " << fx << " at x = (";
    for (std::size_t j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
    os << ")";
    return os.str();
  }
  std::vector<double> point_;
  double value_;
};

/// Which axes receive bin-contribution writes during sampling.
enum class BinUpdate : std::uint8_t {
  all_axes,   ///< standard adaptation: every axis, every sample
  axis0_only  ///< symmetric-integrand variant: axis 0 stands in for all
};

/// Result of one full sampling iteration.
struct SampleOutcome {
  double raw_estimate;
  double raw_variance;
  BinAccumulator contributions;
};

/// Result of a frozen-grid iteration (no bin bookkeeping at all).
struct EstimateVariance {
  double raw_estimate;
  double raw_variance;
};

/**
 * Unit-space position of sample k's random offset r within sub-cube t.
 *
 * Cube t has base-g digits k_j = floor(t / g^j) mod g with axis 0 the
 * fastest-varying; the point is u_j = (k_j + r_j)/g.
 */
inline void cube_unit_point(std::uint64_t t, std::uint64_t g, std::uint32_t dims,
                            std::span<const double> r, std::span<double> u) {
  if (g == 0) throw std::invalid_argument("cube_unit_point: g must be >= 1");
  if (r.size() != dims || u.size() != dims)
    throw std::invalid_argument("cube_unit_point: r and u must have one entry per axis");
  std::uint64_t tt = t;
  const double gd = static_cast<double>(g);
  for (std::uint32_t j = 0; j < dims; ++j) {
    u[j] = (static_cast<double>(tt % g) + r[j]) / gd;
    tt /= g;
  }
  if (tt != 0) throw std::invalid_argument("cube_unit_point: cube index out of range");
}

namespace detail {

/// Welford recurrence; produces an exact 0 second moment for constant input,
/// which the textbook sum-of-squares form cannot promise in floating point.
struct Welford {
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
};

/// Exact per-(axis, bin) totals plus the write count, private to one worker.
struct ExactBins {
  std::uint32_t axes = 0;
  std::uint32_t n_bins = 0;
  std::vector<ExactSum> cells;
  std::uint64_t writes = 0;

  ExactBins(std::uint32_t axes_, std::uint32_t n_bins_)
      : axes(axes_), n_bins(n_bins_), cells(std::size_t{axes_} * n_bins_) {}

  void deposit(std::uint32_t axis, std::uint32_t bin, double v) {
    cells[std::size_t{axis} * n_bins + bin].add(v);
    ++writes;
  }
  void merge(const ExactBins& o) {
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].add(o.cells[i]);
    writes += o.writes;
  }
};

/// Per-worker scratch, allocated once and reused across cubes.
struct CubeScratch {
  std::vector<double> digit;
  std::vector<double> u;
  std::vector<double> x;
  std::vector<std::uint32_t> bin;

  explicit CubeScratch(std::uint32_t dims) : digit(dims), u(dims), x(dims), bin(dims) {}
};

struct CubeStats {
  double sum_scaled;      ///< sum over samples of f(x)*J/(m*p)
  double variance_of_mean;
};

/**
 * Sample the p points of sub-cube t.  This one function is the arithmetic
 * shared by the serial oracle and every parallel worker; everything it
 * computes depends only on (grid, f, seed, iteration, t), never on which
 * thread or batch runs it.
 */
template <bool kBins, Integrand F>
CubeStats run_cube(const F& f, const Grid& grid, std::uint64_t t, std::uint64_t g,
                   std::uint64_t p, std::uint64_t iter_root, double scale,
                   std::uint32_t bin_axes, CubeScratch& scr, ExactBins* bins) {
  const std::uint32_t d = grid.dims();
  {
    std::uint64_t tt = t;
    for (std::uint32_t j = 0; j < d; ++j) {
      scr.digit[j] = static_cast<double>(tt % g);
      tt /= g;
    }
  }
  const double gd = static_cast<double>(g);
  const std::uint64_t croot = cube_root(iter_root, t);
  double sum_scaled = 0.0;
  Welford w;
  for (std::uint64_t k = 0; k < p; ++k) {
    const std::uint64_t proot = point_root(croot, k);
    for (std::uint32_t j = 0; j < d; ++j)
      scr.u[j] = (scr.digit[j] + to_unit(feed(proot, j))) / gd;
    const double jac = grid.transform(scr.u, scr.x, scr.bin);
    const double fx = f(std::span<const double>(scr.x.data(), d));
    const double fj = fx * jac;
    if (!std::isfinite(fj)) throw NonFiniteSample(scr.x, fx);
    sum_scaled += fj * scale;
    w.add(fj);
    if constexpr (kBins) {
      const double sq = fj * fj;
      for (std::uint32_t j = 0; j < bin_axes; ++j) bins->deposit(j, scr.bin[j], sq);
    }
  }
  double var = w.m2 / (static_cast<double>(p) * static_cast<double>(p - 1));
  if (!(var > 0.0)) var = 0.0;
  return {sum_scaled, var};
}

/// d-th integer root of m, or 0 if m is not a perfect d-th power.
inline std::uint64_t exact_root(std::uint64_t m, std::uint32_t d) {
  const auto guess = static_cast<std::uint64_t>(
      std::llround(std::pow(static_cast<double>(m), 1.0 / static_cast<double>(d))));
  for (std::uint64_t g = guess > 2 ? guess - 2 : 1; g <= guess + 2; ++g) {
    std::uint64_t acc = 1;
    bool overflow = false;
    for (std::uint32_t i = 0; i < d && !overflow; ++i) {
      if (acc > m / g) overflow = true;
      else acc *= g;
    }
    if (!overflow && acc == m) return g;
  }
  return 0;
}

struct WorkerPartial {
  ExactSum estimate;
  ExactSum variance;
  ExactBins bins;

  WorkerPartial(std::uint32_t axes, std::uint32_t n_bins) : bins(axes, n_bins) {}
};

/**
 * Run cubes [0, m) in batches of s.  A batch's cubes are processed in index
 * order by exactly one worker; batches are handed out through an atomic
 * cursor.  All cross-cube reductions are exact, so the merged totals carry
 * the same bits no matter how many threads ran or how the batches were cut.
 */
template <bool kBins, Integrand F>
WorkerPartial sample_all_cubes(const F& f, const Grid& grid, std::uint64_t m, std::uint64_t s,
                               std::uint64_t p, std::uint64_t g, std::uint64_t iter_root,
                               double scale, std::uint32_t bin_axes, unsigned max_threads) {
  const std::uint32_t stored_axes = kBins ? bin_axes : 1;
  const std::uint64_t n_batches = (m + s - 1) / s;
  unsigned hw = max_threads ? max_threads : std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(hw, n_batches));

  WorkerPartial total(stored_axes, grid.n_bins());
  if (n_threads <= 1) {
    CubeScratch scr(grid.dims());
    for (std::uint64_t t = 0; t < m; ++t) {
      const CubeStats cs =
          run_cube<kBins>(f, grid, t, g, p, iter_root, scale, bin_axes, scr, &total.bins);
      total.estimate.add(cs.sum_scaled);
      total.variance.add(cs.variance_of_mean);
    }
    return total;
  }

  std::vector<WorkerPartial> partials(n_threads, WorkerPartial(stored_axes, grid.n_bins()));
  std::atomic<std::uint64_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      threads.emplace_back([&, w] {
        CubeScratch scr(grid.dims());
        WorkerPartial& mine = partials[w];
        try {
          for (std::uint64_t b = cursor.fetch_add(1, std::memory_order_relaxed);
               b < n_batches && !failed.load(std::memory_order_relaxed);
               b = cursor.fetch_add(1, std::memory_order_relaxed)) {
            const std::uint64_t begin = b * s;
            const std::uint64_t end = std::min(m, begin + s);
            for (std::uint64_t t = begin; t < end; ++t) {
              const CubeStats cs = run_cube<kBins>(f, grid, t, g, p, iter_root, scale,
                                                   bin_axes, scr, &mine.bins);
              mine.estimate.add(cs.sum_scaled);
              mine.variance.add(cs.variance_of_mean);
            }
          }
        } catch (...) {
          {
            const std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
          failed.store(true, std::memory_order_relaxed);
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  for (const WorkerPartial& part : partials) {
    total.estimate.add(part.estimate);
    total.variance.add(part.variance);
    total.bins.merge(part.bins);
  }
  return total;
}

struct SampleShape {
  std::uint64_t g;
  double scale;  // 1 / (m*p)
};

inline SampleShape check_sample_args(const Grid& grid, std::uint64_t m, std::uint64_t s,
                                     std::uint64_t p) {
  if (m == 0) throw std::invalid_argument("v_sample: m must be >= 1");
  if (p < 2) throw std::invalid_argument("v_sample: p must be >= 2");
  if (s == 0) throw std::invalid_argument("v_sample: batch size must be >= 1");
  const std::uint64_t g = exact_root(m, grid.dims());
  if (g == 0)
    throw std::invalid_argument("v_sample: m must be a perfect d-th power of the cube count");
  const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(p));
  return {g, scale};
}

}  // namespace detail

/**
 * One sampling iteration over all m = g^d sub-cubes, p samples each.
 *
 * Returns the iteration's integral estimate, the variance of that estimate
 * (sum of per-cube variances of the cube means, divided by m^2), and the
 * per-axis bin contributions (f(x)*J)^2 that drive grid adaptation.
 *
 * Logical workers each own s consecutive cubes; max_threads only says how
 * many OS threads execute them (0 = hardware default).  Output is bitwise
 * identical for fixed (seed, iteration, m, p) regardless of either knob:
 * sample values depend only on their SampleKey, and every cross-cube
 * reduction is exact, hence order-independent.
 */
template <Integrand F>
SampleOutcome v_sample(const F& f, const Grid& grid, std::uint64_t m, std::uint64_t s,
                       std::uint64_t p, std::uint64_t seed, std::uint64_t iteration,
                       BinUpdate mode = BinUpdate::all_axes, unsigned max_threads = 0) {
  const auto [g, scale] = detail::check_sample_args(grid, m, s, p);
  const std::uint32_t bin_axes = mode == BinUpdate::all_axes ? grid.dims() : 1;
  detail::WorkerPartial total =
      detail::sample_all_cubes<true>(f, grid, m, s, p, g, detail::iteration_root(seed, iteration),
                                     scale, bin_axes, max_threads);

  // round the exact bin totals into the public matrix (always dims x n_bins;
  // the axis0_only variant simply leaves the other rows zero)
  std::vector<double> values(std::size_t{grid.dims()} * grid.n_bins(), 0.0);
  for (std::uint32_t j = 0; j < bin_axes; ++j)
    for (std::uint32_t i = 0; i < grid.n_bins(); ++i)
      values[std::size_t{j} * grid.n_bins() + i] =
          total.bins.cells[std::size_t{j} * grid.n_bins() + i].value();

  const double md = static_cast<double>(m);
  return {total.estimate.value(), total.variance.value() / (md * md),
          BinAccumulator(grid.dims(), grid.n_bins(), std::move(values), total.bins.writes)};
}

/**
 * Frozen-grid iteration: identical estimate and variance to v_sample for the
 * same inputs, with all bin bookkeeping compiled out.
 */
template <Integrand F>
EstimateVariance v_sample_no_adjust(const F& f, const Grid& grid, std::uint64_t m,
                                    std::uint64_t s, std::uint64_t p, std::uint64_t seed,
                                    std::uint64_t iteration, unsigned max_threads = 0) {
  const auto [g, scale] = detail::check_sample_args(grid, m, s, p);
  detail::WorkerPartial total =
      detail::sample_all_cubes<false>(f, grid, m, s, p, g, detail::iteration_root(seed, iteration),
                                      scale, 1, max_threads);
  const double md = static_cast<double>(m);
  return {total.estimate.value(), total.variance.value() / (md * md)};
}

}  // namespace mcubes
