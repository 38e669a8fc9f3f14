// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mcubes/accumulators.hpp"
#include "mcubes/exact_sum.hpp"
#include "mcubes/grid.hpp"
#include "mcubes/sampler.hpp"

namespace mcubes {

/**
 * Serial reference for one sampling iteration: a single flat loop over the
 * m sub-cubes with none of the batch or thread machinery.  Shares the
 * per-cube arithmetic with v_sample, so for equal (seed, iteration, m, p)
 * the two return bitwise-identical estimates, variances, and contributions.
 * Used by the tests as the ground truth the parallel path must reproduce.
 */
template <Integrand F>
SampleOutcome vegas_serial_iteration(const F& f, const Grid& grid, std::uint64_t m,
                                     std::uint64_t p, std::uint64_t seed,
                                     std::uint64_t iteration,
                                     BinUpdate mode = BinUpdate::all_axes) {
  const auto [g, scale] = detail::check_sample_args(grid, m, /*s=*/1, p);
  const std::uint32_t bin_axes = mode == BinUpdate::all_axes ? grid.dims() : 1;
  const std::uint64_t iter_root = detail::iteration_root(seed, iteration);

  ExactSum estimate;
  ExactSum variance;
  detail::ExactBins bins(bin_axes, grid.n_bins());
  detail::CubeScratch scr(grid.dims());
  for (std::uint64_t t = 0; t < m; ++t) {
    const detail::CubeStats cs =
        detail::run_cube<true>(f, grid, t, g, p, iter_root, scale, bin_axes, scr, &bins);
    estimate.add(cs.sum_scaled);
    variance.add(cs.variance_of_mean);
  }

  std::vector<double> values(std::size_t{grid.dims()} * grid.n_bins(), 0.0);
  for (std::uint32_t j = 0; j < bin_axes; ++j)
    for (std::uint32_t i = 0; i < grid.n_bins(); ++i)
      values[std::size_t{j} * grid.n_bins() + i] =
          bins.cells[std::size_t{j} * grid.n_bins() + i].value();

  const double md = static_cast<double>(m);
  return {estimate.value(), variance.value() / (md * md),
          BinAccumulator(grid.dims(), grid.n_bins(), std::move(values), bins.writes)};
}

}  // namespace mcubes
