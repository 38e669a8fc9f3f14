// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcubes/accumulators.hpp"

namespace mcubes {

/**
 * Per-axis importance grid.
 *
 * Each axis j of the integration box [L_j, H_j] is split into n_bins bins of
 * equal probability mass; only the right edge of each bin is stored, the left
 * edge of bin 0 being L_j.  Sampling is uniform in bin index, so narrow bins
 * concentrate samples: the grid IS the importance distribution.
 */
class Grid {
 public:
  /// Uniform grid over the box given by lower/upper, n_bins bins per axis.
  Grid(std::uint32_t dims, std::uint32_t n_bins, std::span<const double> lower,
       std::span<const double> upper)
      : dims_(dims),
        n_bins_(n_bins),
        lower_(lower.begin(), lower.end()),
        upper_(upper.begin(), upper.end()),
        edges_(std::size_t{dims} * n_bins) {
    if (dims_ == 0) throw std::invalid_argument("Grid: dims must be >= 1");
    if (n_bins_ < 2) throw std::invalid_argument("Grid: n_bins must be >= 2");
    if (lower_.size() != dims_ || upper_.size() != dims_)
      throw std::invalid_argument("Grid: bounds must have one entry per axis");
    for (std::uint32_t j = 0; j < dims_; ++j) {
      if (!(lower_[j] < upper_[j]) || !std::isfinite(lower_[j]) || !std::isfinite(upper_[j]))
        throw std::invalid_argument("Grid: requires finite lower < upper on every axis");
      double* row = edges_.data() + std::size_t{j} * n_bins_;
      const double width = (upper_[j] - lower_[j]) / static_cast<double>(n_bins_);
      for (std::uint32_t i = 0; i + 1 < n_bins_; ++i)
        row[i] = lower_[j] + static_cast<double>(i + 1) * width;
      row[n_bins_ - 1] = upper_[j];
    }
  }

  [[nodiscard]] std::uint32_t dims() const { return dims_; }
  [[nodiscard]] std::uint32_t n_bins() const { return n_bins_; }
  [[nodiscard]] double lower(std::uint32_t axis) const { return lower_[axis]; }
  [[nodiscard]] double upper(std::uint32_t axis) const { return upper_[axis]; }
  [[nodiscard]] std::span<const double> edges(std::uint32_t axis) const {
    return {edges_.data() + std::size_t{axis} * n_bins_, n_bins_};
  }

  /// Bin that unit coordinate u lands in; u == 1.0 clamps into the last bin.
  [[nodiscard]] std::uint32_t bin_index(double u) const {
    const double nb = static_cast<double>(n_bins_);
    const double z = u * nb;
    if (!(z > 0.0)) return 0;
    if (z >= nb) return n_bins_ - 1;
    return static_cast<std::uint32_t>(z);
  }

  void bin_indices(std::span<const double> u, std::span<std::uint32_t> out) const {
    for (std::uint32_t j = 0; j < dims_; ++j) out[j] = bin_index(u[j]);
  }

  /**
   * Map a unit-cube point to integration space.
   *
   * Per axis: z = u*n_bins picks the bin i = floor(z) (clamped to the last
   * bin) and the fraction delta = z - i of its width to advance, so
   * x = left + delta*width.  The jacobian is prod_j n_bins*width_j: the
   * reciprocal of the piecewise-constant sampling density the grid encodes.
   * On a uniform grid it equals the box volume.
   */
  double transform(std::span<const double> u, std::span<double> x) const {
    return transform_impl<false>(u, x, {});
  }

  /// Same map, also reporting the bin index used on every axis.
  double transform(std::span<const double> u, std::span<double> x,
                   std::span<std::uint32_t> bins) const {
    return transform_impl<true>(u, x, bins);
  }

  /**
   * One adaptation step: returns the grid rebinned so that each bin would
   * hold an equal share of the (smoothed, damped) observed importance.
   *
   * Per axis: the contribution row is smoothed with a 3-point running
   * average (the two edge bins average over their two available entries),
   * normalized to fractions c_i, damped to r_i = ((c_i - 1)/ln c_i)^alpha,
   * and the boundaries are rebuilt so every new bin holds rtot/n_bins of r,
   * interpolating linearly inside old bins.  Axes with no contributions at
   * all are left untouched.  With alpha = 0 every contributing bin gets equal
   * importance, which reproduces the old edges: damping off means no motion.
   */
  [[nodiscard]] Grid adjusted(const BinAccumulator& contributions, double alpha) const {
    if (contributions.dims() != dims_ || contributions.n_bins() != n_bins_)
      throw std::invalid_argument("Grid::adjusted: contribution shape mismatch");
    require_valid_alpha(alpha);
    Grid g(*this);
    std::vector<double> scratch(std::size_t{2} * n_bins_);
    for (std::uint32_t j = 0; j < dims_; ++j)
      adjust_axis(g.edges_.data() + std::size_t{j} * n_bins_, lower_[j], upper_[j],
                  contributions.axis_row(j), alpha, scratch.data());
    return g;
  }

  /**
   * Adaptation step for integrands symmetric under coordinate permutation:
   * new boundaries are computed once from axis-0 contributions and replicated
   * to every axis (rescaled in proportion when an axis spans a different
   * range), so all axes end with identical unit-space boundary fractions.
   */
  [[nodiscard]] Grid adjusted_symmetric(std::span<const double> axis0_contributions,
                                        double alpha) const {
    if (axis0_contributions.size() != n_bins_)
      throw std::invalid_argument("Grid::adjusted_symmetric: contribution shape mismatch");
    require_valid_alpha(alpha);
    Grid g(*this);
    std::vector<double> scratch(std::size_t{2} * n_bins_);
    double* row0 = g.edges_.data();
    adjust_axis(row0, lower_[0], upper_[0], axis0_contributions, alpha, scratch.data());
    for (std::uint32_t j = 1; j < dims_; ++j) {
      double* row = g.edges_.data() + std::size_t{j} * n_bins_;
      if (lower_[j] == lower_[0] && upper_[j] == upper_[0]) {
        // identical range: the proportional rescale is the identity, so copy
        // verbatim and keep the axes bit-identical
        for (std::uint32_t i = 0; i < n_bins_; ++i) row[i] = row0[i];
      } else {
        const double range0 = upper_[0] - lower_[0];
        const double range = upper_[j] - lower_[j];
        for (std::uint32_t i = 0; i + 1 < n_bins_; ++i)
          row[i] = lower_[j] + ((row0[i] - lower_[0]) / range0) * range;
        row[n_bins_ - 1] = upper_[j];
      }
    }
    return g;
  }

  /// Plain-text form: "dims n_bins", then per axis one line "L H e_0 ... e_{n-1}".
  void write(std::ostream& os) const {
    os << dims_ << ' ' << n_bins_ << '\n';
    const auto saved = os.precision(17);
    for (std::uint32_t j = 0; j < dims_; ++j) {
      os << lower_[j] << ' ' << upper_[j];
      for (const double e : edges(j)) os << ' ' << e;
      os << '\n';
    }
    os.precision(saved);
  }

  /// Parse the write() format; validates shape and monotonicity.
  static Grid read(std::istream& is) {
    std::uint32_t dims = 0, n_bins = 0;
    if (!(is >> dims >> n_bins) || dims == 0 || n_bins < 2)
      throw std::invalid_argument("Grid::read: malformed header");
    std::vector<double> lower(dims), upper(dims), edges(std::size_t{dims} * n_bins);
    for (std::uint32_t j = 0; j < dims; ++j) {
      if (!(is >> lower[j] >> upper[j]))
        throw std::invalid_argument("Grid::read: malformed axis bounds");
      double* row = edges.data() + std::size_t{j} * n_bins;
      for (std::uint32_t i = 0; i < n_bins; ++i)
        if (!(is >> row[i])) throw std::invalid_argument("Grid::read: malformed edge list");
    }
    return Grid(dims, n_bins, std::move(lower), std::move(upper), std::move(edges));
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid(std::uint32_t dims, std::uint32_t n_bins, std::vector<double> lower,
       std::vector<double> upper, std::vector<double> raw_edges)
      : dims_(dims),
        n_bins_(n_bins),
        lower_(std::move(lower)),
        upper_(std::move(upper)),
        edges_(std::move(raw_edges)) {
    for (std::uint32_t j = 0; j < dims_; ++j) {
      if (!(lower_[j] < upper_[j]))
        throw std::invalid_argument("Grid: requires lower < upper on every axis");
      double prev = lower_[j];
      for (const double e : edges(j)) {
        if (!(e > prev)) throw std::invalid_argument("Grid: edges must increase strictly");
        prev = e;
      }
      if (edges(j).back() != upper_[j])
        throw std::invalid_argument("Grid: last edge must equal the upper bound");
    }
  }

  static void require_valid_alpha(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("Grid: damping exponent alpha must be finite and >= 0");
  }

  template <bool kWantBins>
  double transform_impl(std::span<const double> u, std::span<double> x,
                        std::span<std::uint32_t> bins) const {
    double jac = 1.0;
    const double nb = static_cast<double>(n_bins_);
    for (std::uint32_t j = 0; j < dims_; ++j) {
      const double z = u[j] * nb;
      std::uint32_t i = 0;
      if (z >= nb)
        i = n_bins_ - 1;
      else if (z > 0.0)
        i = static_cast<std::uint32_t>(z);
      const double* row = edges_.data() + std::size_t{j} * n_bins_;
      const double left = i == 0 ? lower_[j] : row[i - 1];
      const double width = row[i] - left;
      x[j] = left + (z - static_cast<double>(i)) * width;
      jac *= nb * width;
      if constexpr (kWantBins) bins[j] = i;
    }
    return jac;
  }

  /**
   * Rebin one axis to equal importance shares.  The walk mirrors the classic
   * VEGAS rebinning: sweep old bins accumulating importance, and drop each
   * new boundary where the running total crosses the next multiple of
   * rtot/n_bins, interpolating linearly within the crossed bin.
   */
  static void adjust_axis(double* edges, double lo, double hi, std::span<const double> contrib,
                          double alpha, double* scratch) {
    const std::size_t n = contrib.size();
    bool any = false;
    for (const double c : contrib) {
      if (c < 0.0 || !std::isfinite(c))
        throw std::invalid_argument("Grid: contributions must be finite and >= 0");
      any |= c != 0.0;
    }
    if (!any || n == 1) return;  // nothing observed: leave the axis alone

    double* smooth = scratch;
    double* imp = scratch + n;
    smooth[0] = 0.5 * (contrib[0] + contrib[1]);
    for (std::size_t i = 1; i + 1 < n; ++i)
      smooth[i] = (contrib[i - 1] + contrib[i] + contrib[i + 1]) / 3.0;
    smooth[n - 1] = 0.5 * (contrib[n - 2] + contrib[n - 1]);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += smooth[i];

    double rtot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = smooth[i] / total;
      double r = 0.0;
      if (c == 1.0)
        r = 1.0;  // limit of ((c-1)/ln c)^alpha as c -> 1
      else if (c > 0.0)
        r = std::pow((c - 1.0) / std::log(c), alpha);
      imp[i] = r;
      rtot += r;
    }

    const double share = rtot / static_cast<double>(n);
    std::vector<double> out(n);
    out[n - 1] = hi;
    double target = 0.0;
    double cum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      target += share;
      while (k + 1 < n && (imp[k] == 0.0 || cum + imp[k] < target)) {
        cum += imp[k];
        ++k;
      }
      const double left = k == 0 ? lo : edges[k - 1];
      const double width = edges[k] - left;
      out[i] = left + width * ((target - cum) / imp[k]);
    }

    // repair passes: rounding at the walk's crossings can in principle
    // produce a tie; force strict monotonicity without moving anything else
    double prev = lo;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(out[i] > prev))
        out[i] = std::nextafter(prev, std::numeric_limits<double>::infinity());
      prev = out[i];
    }
    double next = hi;
    for (std::size_t i = n - 1; i-- > 0;) {
      if (!(out[i] < next))
        out[i] = std::nextafter(next, -std::numeric_limits<double>::infinity());
      next = out[i];
    }

    for (std::size_t i = 0; i < n; ++i) edges[i] = out[i];
  }

  std::uint32_t dims_;
  std::uint32_t n_bins_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> edges_;  // dims x n_bins, row-major; edges_[j*n_bins+i] ends bin i
};

}  // namespace mcubes
