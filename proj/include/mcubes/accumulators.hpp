// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mcubes {

/**
 * Per-axis, per-bin totals of squared weighted sample values, (f(x)*J)^2.
 * One iteration of sampling fills this; grid adjustment consumes it.
 * writes() counts every deposit and is the hook for accounting how much
 * bin-update work a sampling variant performs.
 */
class BinAccumulator {
 public:
  BinAccumulator(std::uint32_t dims, std::uint32_t n_bins)
      : dims_(dims), n_bins_(n_bins), values_(std::size_t{dims} * n_bins, 0.0) {
    if (dims == 0) throw std::invalid_argument("BinAccumulator: dims must be >= 1");
    if (n_bins == 0) throw std::invalid_argument("BinAccumulator: n_bins must be >= 1");
  }

  /// Assemble from an already-reduced matrix (values row-major, dims x n_bins).
  BinAccumulator(std::uint32_t dims, std::uint32_t n_bins, std::vector<double> values,
                 std::uint64_t writes)
      : dims_(dims), n_bins_(n_bins), values_(std::move(values)), writes_(writes) {
    if (values_.size() != std::size_t{dims} * n_bins)
      throw std::invalid_argument("BinAccumulator: value matrix has wrong shape");
  }

  void deposit(std::uint32_t axis, std::uint32_t bin, double v) {
    values_[std::size_t{axis} * n_bins_ + bin] += v;
    ++writes_;
  }

  [[nodiscard]] double at(std::uint32_t axis, std::uint32_t bin) const {
    return values_[std::size_t{axis} * n_bins_ + bin];
  }
  [[nodiscard]] std::span<const double> axis_row(std::uint32_t axis) const {
    if (axis >= dims_) throw std::invalid_argument("BinAccumulator: axis out of range");
    return {values_.data() + std::size_t{axis} * n_bins_, n_bins_};
  }

  [[nodiscard]] std::uint32_t dims() const { return dims_; }
  [[nodiscard]] std::uint32_t n_bins() const { return n_bins_; }
  [[nodiscard]] std::uint64_t writes() const { return writes_; }

 private:
  std::uint32_t dims_;
  std::uint32_t n_bins_;
  std::vector<double> values_;
  std::uint64_t writes_ = 0;
};

/// Running sums over one sub-cube's samples.
struct CubeAccumulator {
  double sum_v = 0.0;
  double sum_v2 = 0.0;
  std::uint64_t count = 0;

  void add(double v) {
    sum_v += v;
    sum_v2 += v * v;
    ++count;
  }
};

/**
 * Variance of the cube's mean estimate: (sum_v2/p - mean^2) / (p - 1),
 * clamped at zero so rounding can never hand a negative weight downstream.
 */
inline double update_variance(const CubeAccumulator& a) {
  if (a.count < 2)
    throw std::invalid_argument("update_variance: needs at least two samples");
  const double p = static_cast<double>(a.count);
  const double mean = a.sum_v / p;
  const double var = (a.sum_v2 / p - mean * mean) / (p - 1.0);
  return var > 0.0 ? var : 0.0;
}

}  // namespace mcubes
