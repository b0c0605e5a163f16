#include "dragobs/montecarlo.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "dragobs/csv.hpp"

namespace dragobs {

namespace {

constexpr double kConvergenceThreshold = 1e-8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
  return lo + u * (hi - lo);
}

ObserverState sample_init(const TruthState& truth, const McInitSampler& sampler,
                          std::mt19937_64& rng) {
  ObserverState o;
  o.u_hat = truth.u + uniform(rng, -sampler.vel_error_range, sampler.vel_error_range);
  o.v_hat = truth.v + uniform(rng, -sampler.vel_error_range, sampler.vel_error_range);
  const double r = sampler.eta_ball_radius;
  // Rejection sampling keeps the draw uniform over the ball; deterministic
  // for a given stream.
  do {
    o.eta_hat = Vec3(uniform(rng, -r, r), uniform(rng, -r, r), uniform(rng, -r, r));
  } while (o.eta_hat.norm() > r);
  return o;
}

McRunResult run_one(const Scenario& base, int run_index,
                    const McInitSampler& sampler, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed * 0x51DCA9A6E3B5F2CDULL +
                                 static_cast<std::uint64_t>(run_index) + 1));
  Scenario s = base;
  TruthState truth0 = s.initial_state;
  truth0.eta.normalize();
  s.observer_init = sample_init(truth0, sampler, rng);
  // Give each run its own noise stream as well (no-op for ideal sensors).
  s.sensors.seed = splitmix64(seed ^ (static_cast<std::uint64_t>(run_index) << 20));

  McRunResult res;
  res.run = run_index;
  res.init = *s.observer_init;
  try {
    const RunRecord rec = run_scenario(s);
    res.v_final = rec.V.back();
    res.converged = res.v_final < kConvergenceThreshold;
    res.settle_time = -1.0;
    if (res.converged) {
      // Last sample at or above the threshold; settled just after it.
      std::size_t last_above = 0;
      bool any_above = false;
      for (std::size_t k = 0; k < rec.V.size(); ++k) {
        if (rec.V[k] >= kConvergenceThreshold) {
          last_above = k;
          any_above = true;
        }
      }
      res.settle_time = any_above ? rec.t[std::min(last_above + 1,
                                                   rec.t.size() - 1)]
                                  : 0.0;
    }
  } catch (const std::exception&) {
    res.aborted = true;
  }
  return res;
}

McSummary aggregate(std::vector<McRunResult> runs) {
  McSummary sum;
  sum.n = static_cast<int>(runs.size());
  for (const auto& r : runs) {
    if (r.aborted) ++sum.aborted_count;
    if (r.converged) {
      ++sum.converged_count;
      sum.worst_settle_time = std::max(sum.worst_settle_time, r.settle_time);
    }
  }
  sum.convergence_fraction =
      sum.n ? static_cast<double>(sum.converged_count) / sum.n : 0.0;
  sum.runs = std::move(runs);
  return sum;
}

void check_preconditions(const Scenario& s, int n) {
  if (n < 0) throw std::invalid_argument("monte_carlo: n must be >= 0");
  const GainValidation gv = validate_gains(s.observer.gains);
  if (s.strict_gains && !gv.ok)
    throw std::invalid_argument(
        "monte_carlo: gains fail validation (" + gv.describe() +
        "); set strict_gains=false (--force) to run anyway");
  if (!s.run_observer)
    throw std::invalid_argument("monte_carlo: scenario must run the observer");
}

}  // namespace

McSummary monte_carlo_serial(const Scenario& s, int n,
                             const McInitSampler& sampler, std::uint64_t seed) {
  check_preconditions(s, n);
  std::vector<McRunResult> runs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) runs[static_cast<std::size_t>(i)] = run_one(s, i, sampler, seed);
  return aggregate(std::move(runs));
}

McSummary monte_carlo_parallel(const Scenario& s, int n,
                               const McInitSampler& sampler,
                               std::uint64_t seed) {
  check_preconditions(s, n);
  std::vector<McRunResult> runs(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i)
    runs[static_cast<std::size_t>(i)] = run_one(s, i, sampler, seed);
  return aggregate(std::move(runs));
}

McSummary monte_carlo(const Scenario& s, int n, const McInitSampler& sampler,
                      std::uint64_t seed, bool parallel) {
  return parallel ? monte_carlo_parallel(s, n, sampler, seed)
                  : monte_carlo_serial(s, n, sampler, seed);
}

void write_mc_outputs(const McSummary& sum, const Scenario& s,
                      const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  {
    CsvWriter runs(dir / "mc_runs.csv",
                   "run,u_hat0,v_hat0,eta1_hat0,eta2_hat0,eta3_hat0,aborted,"
                   "converged,v_final,settle_time");
    for (const auto& r : sum.runs) {
      runs.row({static_cast<double>(r.run), r.init.u_hat, r.init.v_hat,
                r.init.eta_hat.x(), r.init.eta_hat.y(), r.init.eta_hat.z(),
                r.aborted ? 1.0 : 0.0, r.converged ? 1.0 : 0.0, r.v_final,
                r.settle_time});
    }
  }

  nlohmann::json j;
  j["scenario"] = s.name;
  j["n"] = sum.n;
  j["converged"] = sum.converged_count;
  j["aborted"] = sum.aborted_count;
  j["convergence_fraction"] = sum.convergence_fraction;
  j["worst_settle_time"] = sum.worst_settle_time;
  std::ofstream out(dir / "summary.json");
  out << j.dump(2) << "\n";
}

}  // namespace dragobs
