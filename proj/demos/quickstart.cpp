// SPDX-License-Identifier: Apache-2.0
//
// Minimal library walkthrough: integrate a Gaussian bump over [0,1]^3 and
// print the running estimate as the grid adapts.

#include <cmath>
#include <cstdio>
#include <span>

#include "mcubes/mcubes.hpp"

int main() {
  const auto f = [](std::span<const double> x) {
    double s = 0.0;
    for (const double xi : x) {
      const double t = xi - 0.5;
      s += t * t;
    }
    return std::exp(-50.0 * s);
  };

  mcubes::RunConfig cfg;
  cfg.dims = 3;
  cfg.maxcalls = 100'000;
  cfg.itmax = 15;
  cfg.ita = 10;
  cfg.tau_rel = 1e-3;
  cfg.seed = 42;
  cfg.lower.assign(3, 0.0);
  cfg.upper.assign(3, 1.0);

  const auto trace = [](const mcubes::IterationView& v) {
    std::printf("iter %2u %s  I_i = %.8f  combined = %.8f +- %.2e  chi2/dof = %.3f\n",
                v.iteration, v.adjusting ? "adapt " : "frozen", v.result.estimate,
                v.running.estimate, v.running.sigma, v.running.chi2_dof);
  };
  const mcubes::IntegrationResult r = mcubes::integrate(f, cfg, trace);

  // exact: (sqrt(pi/50) * erf(sqrt(50)/2))^3
  const double per_axis = std::sqrt(M_PI / 50.0) * std::erf(std::sqrt(50.0) / 2.0);
  const double truth = per_axis * per_axis * per_axis;
  std::printf("\nresult    %.10f +- %.2e  (%s after %u iterations)\n", r.estimate, r.sigma,
              r.converged ? "converged" : "not converged", r.iterations_used);
  std::printf("exact     %.10f  (off by %.2f sigma)\n", truth,
              std::abs(r.estimate - truth) / r.sigma);
  return 0;
}
