#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dragobs/runner.hpp"

namespace dragobs {

// Observer initial conditions are drawn per run: velocities uniformly in
// truth +- vel_error_range, eta_hat uniformly in the origin-centered ball of
// the given radius (the estimate is unconstrained, so eta3_hat < 0 is fair).
struct McInitSampler {
  double vel_error_range = 10.0;  // [m/s]
  double eta_ball_radius = 5.0;
};

struct McRunResult {
  int run = 0;
  ObserverState init;
  bool aborted = false;
  bool converged = false;   // V at end < 1e-8
  double v_final = 0.0;
  double settle_time = 0.0; // first time V < 1e-8 and stays there; -1 if never
};

struct McSummary {
  int n = 0;
  int converged_count = 0;
  int aborted_count = 0;
  double convergence_fraction = 0.0;
  double worst_settle_time = 0.0;  // max over converged runs
  std::vector<McRunResult> runs;   // ordered by run index
};

// Serial reference implementation.
McSummary monte_carlo_serial(const Scenario& s, int n,
                             const McInitSampler& sampler, std::uint64_t seed);

// OpenMP-parallel sweep over independent runs; produces results identical
// to the serial reference (per-run RNG streams, order-independent
// aggregation).
McSummary monte_carlo_parallel(const Scenario& s, int n,
                               const McInitSampler& sampler,
                               std::uint64_t seed);

McSummary monte_carlo(const Scenario& s, int n, const McInitSampler& sampler,
                      std::uint64_t seed, bool parallel = true);

// mc_runs.csv plus summary.json under out_dir.
void write_mc_outputs(const McSummary& sum, const Scenario& s,
                      const std::string& out_dir);

}  // namespace dragobs
