#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dragobs/analysis.hpp"
#include "dragobs/ekf.hpp"
#include "dragobs/scenario.hpp"

namespace dragobs {

// Post-transient summary metrics. Windows start 3/|lambda_slowest| seconds
// after the last (re)initialization, so only steady-state behavior enters.
struct RunSummary {
  double window_start = 0.0;  // absolute time; may exceed the run end
  int window_samples = 0;

  // Per-channel RMSEs over the window (observer vs truth).
  double rmse_u = 0.0;
  double rmse_v = 0.0;
  double rmse_phi_deg = 0.0;
  double rmse_theta_deg = 0.0;
  // Aggregates: per-axis mean squares, i.e. sqrt(mean((e_u^2 + e_v^2)/2)).
  double rmse_vel = 0.0;
  double rmse_angle_deg = 0.0;

  double max_eta_norm_dev = 0.0;  // max | |eta_hat| - 1 | over the window
  double coriolis_max = 0.0;      // over the whole run
  double coriolis_rms = 0.0;
  double min_eta3 = 0.0;          // truth, over the whole run
  double v_end = 0.0;
  bool converged = false;  // v_end < 1e-8

  std::optional<double> ekf_rmse_u, ekf_rmse_v, ekf_rmse_phi_deg,
      ekf_rmse_theta_deg;
};

// Full per-step record of one simulation run.
struct RunRecord {
  std::vector<double> t;
  std::vector<TruthState> truth;
  std::vector<double> c_true;
  std::vector<double> coriolis;
  std::vector<ImuSample> imu;  // what the estimators saw

  std::vector<ObserverState> observer;  // empty if the observer is disabled
  std::vector<Vec5> ekf_mean;           // empty if the EKF is disabled
  std::vector<double> ekf_cov_trace;

  // Observer diagnostics (empty if the observer is disabled).
  std::vector<ErrorCoordinates> errors;
  std::vector<double> V;
  std::vector<double> W;
  std::vector<double> wdot_fd;      // second-order finite differences of W
  std::vector<double> decay_bound;  // NaN when the gains are invalid

  bool gains_valid = false;
  double dt = 0.0;
  RunSummary summary;
};

// Runs the full deterministic loop: truth step, sensor sampling and
// corruption, estimator steps, diagnostics, reinit events applied at their
// timestamps. Throws on estimator or truth divergence with the step index
// and a state snapshot in the message; refuses invalid gains when the
// scenario is strict.
RunRecord run_scenario(const Scenario& s);

enum class TheoryVerdict {
  pass,               // bound held at every interior step
  fail,               // at least one violation beyond tolerance
  refused,            // preconditions not met (see reason)
  robustness_report,  // full model with active Coriolis: reported, not asserted
};

struct TheoryReport {
  TheoryVerdict verdict = TheoryVerdict::refused;
  std::string reason;
  double refusal_time = 0.0;  // when a trajectory precondition broke

  // max over interior steps of (Wdot_fd - bound) / (1 + |W|)
  double max_margin = 0.0;
  bool v_monotone = false;
  double v_end = 0.0;
  double min_eta3 = 0.0;

  std::string describe() const;
};

// Margin tolerance of the decay-bound assertion, relative to 1 + |W|.
inline constexpr double kTheoryMarginTol = 1e-6;

// Runs the scenario and checks the decay inequality
// Wdot_fd <= bound + tol (1 + |W|) at every interior step. Requires ideal
// sensors, valid gains, c(t) within [c_l, c_u] and truth eta3 >= epsilon
// throughout; refuses otherwise. A full-model run with nonzero Coriolis
// terms is reported in robustness mode without asserting the bound.
TheoryReport theory_check(const Scenario& s);
TheoryReport theory_check(const Scenario& s, const RunRecord& rec);

// Writes truth.csv, imu.csv, observer_estimate.csv, ekf_estimate.csv,
// diagnostics.csv and summary.json under out_dir (created if needed).
void write_run_outputs(const RunRecord& rec, const Scenario& s,
                       const std::string& out_dir);

std::string summary_json(const RunRecord& rec, const Scenario& s);

// Slowest linearized error-system eigenvalue magnitude for the given gains
// and nominal coefficient; sets the post-transient exclusion window 3/|l|.
double slowest_eigenvalue_magnitude(const Gains& gains, double c_bar);

}  // namespace dragobs
