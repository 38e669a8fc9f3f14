// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the test suite: an independent 1D quadrature oracle,
// Gauss-Legendre tensor quadrature, bit-level comparison, and a subprocess
// runner for the CLI tests.
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsupport {

/// Adaptive Simpson quadrature, the reference oracle for per-axis integrals.
/// Deliberately shares no code with the library under test.
inline double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                              double fa, double fm, double fb, double whole, double tol,
                              int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double h6 = (b - a) / 12.0;
  const double left = h6 * (fa + 4.0 * flm + fm);
  const double right = h6 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// `tol` is relative to the integral's magnitude (floored at 1), so steep
/// integrands do not drive the recursion below the rounding noise of the
/// Simpson delta.
inline double quad_1d(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-13) {
  // split into a few panels first so narrow peaks cannot hide from the
  // initial Simpson estimate
  constexpr int panels = 16;
  struct Panel {
    double a, b, fa, fm, fb, whole;
  };
  std::array<Panel, panels> grid;
  double rough = 0.0;
  for (int i = 0; i < panels; ++i) {
    Panel& p = grid[i];
    p.a = a + (b - a) * i / panels;
    p.b = a + (b - a) * (i + 1) / panels;
    p.fa = f(p.a);
    p.fb = f(p.b);
    p.fm = f(0.5 * (p.a + p.b));
    p.whole = (p.b - p.a) / 6.0 * (p.fa + 4.0 * p.fm + p.fb);
    rough += p.whole;
  }
  const double tol_abs = tol * std::max(1.0, std::abs(rough)) / panels;
  double total = 0.0;
  for (const Panel& p : grid)
    total += simpson_recurse(f, p.a, p.b, p.fa, p.fm, p.fb, p.whole, tol_abs, 48);
  return total;
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

/// Tensor-product Gauss-Legendre integral of f over [0,1]^d (spectrally
/// accurate for smooth integrands; used to cross-check closed forms).
inline double tensor_gauss(const std::function<double(const std::vector<double>&)>& f,
                           int d, int n) {
  std::vector<double> nodes, weights;
  gauss_legendre(n, nodes, weights);
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      x[j] = 0.5 * (nodes[idx[j]] + 1.0);
      w *= 0.5 * weights[idx[j]];
    }
    sum += w * f(x);
    int j = 0;
    for (; j < d; ++j) {
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
    if (j == d) break;
  }
  return sum;
}

inline std::uint64_t bits_of(double v) { return std::bit_cast<std::uint64_t>(v); }

/// Result of running a child process to completion.
struct ProcResult {
  int exit_code;
  std::string out;
};

/// Run a shell command, capture stdout, return its exit code.
inline ProcResult run_process(const std::string& command) {
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + command);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  int code = -1;
  if (WIFEXITED(status)) code = WEXITSTATUS(status);
  return {code, std::move(out)};
}

}  // namespace testsupport
