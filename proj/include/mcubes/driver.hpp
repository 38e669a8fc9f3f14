// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "mcubes/grid.hpp"
#include "mcubes/sampler.hpp"

namespace mcubes {

/// Grid-adaptation flavor.  mcubes1d adapts axis 0 only and replicates its
/// boundaries to every axis; valid only for permutation-symmetric integrands.
enum class Variant : std::uint8_t { mcubes, mcubes1d };

[[nodiscard]] inline std::string_view variant_name(Variant v) {
  return v == Variant::mcubes ? "mcubes" : "mcubes1d";
}

[[nodiscard]] inline std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "mcubes") return Variant::mcubes;
  if (s == "mcubes1d") return Variant::mcubes1d;
  return std::nullopt;
}

/// Everything a run needs.  Aggregate so call sites can use designated
/// initializers; validate() reports the first broken invariant.
struct RunConfig {
  std::uint32_t dims = 0;
  std::uint32_t n_bins = 50;
  std::uint64_t maxcalls = 0;   ///< target integrand evaluations per iteration
  std::uint32_t itmax = 15;     ///< iteration cap
  std::uint32_t ita = 10;       ///< adapting iterations; the rest run frozen
  double tau_rel = 1e-3;        ///< requested relative error
  double alpha = 1.5;           ///< adaptation damping exponent
  double chi2_dof_max = 1.5;    ///< iteration-consistency gate
  std::uint64_t seed = 0;
  Variant variant = Variant::mcubes;
  std::vector<double> lower;
  std::vector<double> upper;
  unsigned workers = 0;  ///< parallel workers for sampling; 0 = hardware count

  void validate() const {
    if (dims < 1) throw std::invalid_argument("RunConfig: dims must be >= 1");
    if (n_bins < 2) throw std::invalid_argument("RunConfig: n_bins must be >= 2");
    if (dims >= 63 || maxcalls < (std::uint64_t{2} << dims))
      throw std::invalid_argument("RunConfig: maxcalls must be >= 2*2^dims");
    if (!(tau_rel > 0.0) || !(tau_rel < 1.0))
      throw std::invalid_argument("RunConfig: tau_rel must lie in (0, 1)");
    if (itmax < 1) throw std::invalid_argument("RunConfig: itmax must be >= 1");
    if (ita > itmax) throw std::invalid_argument("RunConfig: ita must not exceed itmax");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("RunConfig: alpha must be finite and >= 0");
    if (!(chi2_dof_max > 0.0))
      throw std::invalid_argument("RunConfig: chi2_dof_max must be positive");
    if (lower.size() != dims || upper.size() != dims)
      throw std::invalid_argument("RunConfig: bounds must have one entry per axis");
    for (std::uint32_t j = 0; j < dims; ++j)
      if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !(lower[j] < upper[j]))
        throw std::invalid_argument("RunConfig: requires finite lower < upper on every axis");
  }
};

/// Derived per-iteration sampling shape.
struct SetupParams {
  std::uint64_t g;  ///< intervals per axis
  std::uint64_t m;  ///< sub-cube count, g^dims
  std::uint64_t p;  ///< samples per sub-cube
  std::uint64_t s;  ///< sub-cubes per worker batch
};

/// Batch size: enough batches for ~32 per worker so stragglers smooth out.
[[nodiscard]] inline std::uint64_t set_batch_size(std::uint64_t m, unsigned workers) {
  if (m == 0) throw std::invalid_argument("set_batch_size: m must be >= 1");
  if (workers == 0) throw std::invalid_argument("set_batch_size: workers must be >= 1");
  const std::uint64_t per = std::uint64_t{workers} * 32;
  return std::max<std::uint64_t>(1, (m + per - 1) / per);
}

namespace detail {

/// Largest g with 2*g^d <= maxcalls, computed in integers so borderline
/// values are not lost to floating-point rounding of the d-th root.
inline std::uint64_t intervals_per_axis(std::uint64_t maxcalls, std::uint32_t d) {
  const auto fits = [&](std::uint64_t g) {
    unsigned __int128 acc = 2;
    for (std::uint32_t i = 0; i < d; ++i) {
      acc *= g;
      if (acc > maxcalls) return false;
    }
    return true;
  };
  auto g = static_cast<std::uint64_t>(std::floor(
      std::pow(static_cast<double>(maxcalls) / 2.0, 1.0 / static_cast<double>(d))));
  if (g < 1) g = 1;
  while (!fits(g) && g > 1) --g;
  while (fits(g + 1)) ++g;
  return g;
}

}  // namespace detail

/// Alg-2 setup: g intervals per axis, m = g^d cubes, p samples per cube
/// (at least 2 so a variance exists), batch size from the worker count.
[[nodiscard]] inline SetupParams setup(const RunConfig& cfg) {
  cfg.validate();
  const std::uint64_t g = detail::intervals_per_axis(cfg.maxcalls, cfg.dims);
  std::uint64_t m = 1;
  for (std::uint32_t i = 0; i < cfg.dims; ++i) m *= g;
  const std::uint64_t p = std::max<std::uint64_t>(2, cfg.maxcalls / m);
  unsigned workers = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  return {g, m, p, set_batch_size(m, workers)};
}

/// One iteration's raw result.
struct IterationResult {
  double estimate;
  double variance;
  std::uint32_t index;  ///< 1-based iteration number
};

/// Inverse-variance combination of a run's iterations so far.
struct Combined {
  double estimate;
  double sigma;
  double chi2_dof;
};

/**
 * Standard inverse-variance weighting: w_i = 1/var_i, I = sum(w I)/sum(w),
 * sigma = 1/sqrt(sum w), chi2/dof = sum w_i (I_i - I)^2 / max(1, n-1).
 *
 * An iteration with zero variance is exact, and the weights break down on
 * it; the first such iteration is returned as-is with sigma = chi2 = 0.
 */
[[nodiscard]] inline Combined weighted_estimate(std::span<const IterationResult> history) {
  if (history.empty())
    throw std::invalid_argument("weighted_estimate: history must be non-empty");
  for (const IterationResult& it : history) {
    if (!(it.variance >= 0.0))
      throw std::invalid_argument("weighted_estimate: negative variance");
    if (it.variance == 0.0) return {it.estimate, 0.0, 0.0};
  }
  double sum_w = 0.0;
  double sum_wi = 0.0;
  for (const IterationResult& it : history) {
    const double w = 1.0 / it.variance;
    sum_w += w;
    sum_wi += w * it.estimate;
  }
  const double mean = sum_wi / sum_w;
  double chi2 = 0.0;
  for (const IterationResult& it : history) {
    const double d = it.estimate - mean;
    chi2 += d * d / it.variance;
  }
  const double dof = static_cast<double>(std::max<std::size_t>(1, history.size() - 1));
  return {mean, 1.0 / std::sqrt(sum_w), chi2 / dof};
}

/// Relative-error target met and iterations mutually consistent?  Near-zero
/// estimates switch to an absolute test so the ratio cannot blow up.
[[nodiscard]] inline bool check_convergence(const Combined& c, const RunConfig& cfg) {
  const double scale = std::abs(c.estimate);
  const bool error_ok = scale < 1e-300 ? c.sigma <= cfg.tau_rel
                                       : c.sigma / scale <= cfg.tau_rel;
  return error_ok && c.chi2_dof <= cfg.chi2_dof_max;
}

/// Full-run outcome.
struct IntegrationResult {
  double estimate = 0.0;
  double sigma = 0.0;
  double chi2_dof = 0.0;
  std::uint32_t iterations_used = 0;
  bool converged = false;
  std::uint64_t total_samples = 0;  ///< integrand evaluations across all iterations
  std::uint64_t bin_writes = 0;     ///< contribution deposits across all iterations
  SetupParams params{};
  std::vector<IterationResult> history;
};

/// Snapshot handed to the per-iteration observer.  The grid reference is to
/// the state after this iteration's adjustment (if any) and dies with the
/// observer call.
struct IterationView {
  std::uint32_t iteration;
  bool adjusting;
  const IterationResult& result;
  const Combined& running;
  const Grid& grid;
  std::uint64_t bin_writes;  ///< contribution deposits made by this iteration
};

using IterationObserver = std::function<void(const IterationView&)>;

/**
 * The full integration loop: ita adapting iterations (sample, re-estimate,
 * adjust the grid), then frozen-grid iterations up to itmax, stopping early
 * once the weighted estimate meets the tolerance and chi2 gates.
 *
 * Reproducible: a fixed config (bounds, seed, shape parameters) gives a
 * bitwise-identical result regardless of worker count or batch size.
 */
template <Integrand F>
IntegrationResult integrate(const F& f, const RunConfig& cfg,
                            const IterationObserver& observe = {}) {
  const SetupParams sp = setup(cfg);
  Grid grid(cfg.dims, cfg.n_bins, cfg.lower, cfg.upper);

  IntegrationResult res;
  res.params = sp;
  res.history.reserve(cfg.itmax);
  const BinUpdate mode =
      cfg.variant == Variant::mcubes1d ? BinUpdate::axis0_only : BinUpdate::all_axes;

  for (std::uint32_t iter = 1; iter <= cfg.itmax; ++iter) {
    const bool adjusting = iter <= cfg.ita;
    std::uint64_t writes = 0;
    if (adjusting) {
      SampleOutcome out =
          v_sample(f, grid, sp.m, sp.s, sp.p, cfg.seed, iter, mode, cfg.workers);
      res.history.push_back({out.raw_estimate, out.raw_variance, iter});
      writes = out.contributions.writes();
      grid = cfg.variant == Variant::mcubes1d
                 ? grid.adjusted_symmetric(out.contributions.axis_row(0), cfg.alpha)
                 : grid.adjusted(out.contributions, cfg.alpha);
    } else {
      const EstimateVariance ev =
          v_sample_no_adjust(f, grid, sp.m, sp.s, sp.p, cfg.seed, iter, cfg.workers);
      res.history.push_back({ev.raw_estimate, ev.raw_variance, iter});
    }
    res.bin_writes += writes;
    res.total_samples += sp.m * sp.p;
    res.iterations_used = iter;

    const Combined c = weighted_estimate(res.history);
    res.estimate = c.estimate;
    res.sigma = c.sigma;
    res.chi2_dof = c.chi2_dof;
    if (observe) observe(IterationView{iter, adjusting, res.history.back(), c, grid, writes});
    if (check_convergence(c, cfg)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace mcubes
