#include "dragobs/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dragobs/csv.hpp"
#include "dragobs/integrate.hpp"
#include "dragobs/sensors.hpp"

namespace dragobs {

namespace {

constexpr double kRad2Deg = 57.295779513082320876798154814105;
constexpr double kConvergenceThreshold = 1e-8;  // on V
constexpr double kVMonotoneTol = 1e-12;         // relative, per step

using Vec11 = Eigen::Matrix<double, 11, 1>;

std::string state_snapshot(const TruthState& truth, const ObserverState& obs) {
  std::ostringstream os;
  os << "truth (u,v,w)=(" << truth.u << "," << truth.v << "," << truth.w
     << ") eta=(" << truth.eta.transpose() << "), observer (u,v)=("
     << obs.u_hat << "," << obs.v_hat << ") eta_hat=("
     << obs.eta_hat.transpose() << ")";
  return os.str();
}

ObserverState apply_reinit(const ObserverState& obs, const ReinitEvent& ev) {
  ObserverState out = obs;
  if (ev.u_hat) out.u_hat = *ev.u_hat;
  if (ev.v_hat) out.v_hat = *ev.v_hat;
  if (ev.eta_hat) out.eta_hat = *ev.eta_hat;
  if (ev.phi_deg || ev.theta_deg) {
    const double phi = ev.phi_deg.value_or(0.0) / kRad2Deg;
    const double theta = ev.theta_deg.value_or(0.0) / kRad2Deg;
    out.eta_hat = eta_from_angles(phi, theta);
  }
  return out;
}

// One RK4 step of the combined truth+observer ODE with ideal measurements
// evaluated at the stage times. Used by design-model scenarios so that the
// discrete trajectory tracks the continuous coupled system to O(dt^4).
void coupled_step(TruthState& truth, ObserverState& obs, const Scenario& s,
                  double c_bar, double t) {
  const double g = s.observer.gains.g;
  Vec11 x;
  x << truth.u, truth.v, truth.w, truth.eta, obs.u_hat, obs.v_hat, obs.eta_hat;

  auto f = [&](double ts, const Vec11& xs) -> Vec11 {
    TruthState st;
    st.u = xs[0];
    st.v = xs[1];
    st.w = xs[2];
    st.eta = xs.segment<3>(3);
    ObserverState ob;
    ob.u_hat = xs[5];
    ob.v_hat = xs[6];
    ob.eta_hat = xs.tail<3>();

    const RateThrustInput in = s.inputs.eval(ts);
    const double c = drag_coefficient(s.drag, in.motor_speeds);
    const TruthDerivative td =
        s.truth_model == TruthModel::design
            ? design_derivative(st, in.omega_body, c, g)
            : truth_derivative(st, in, c, g, s.drag.mass);
    const ImuSample ideal =
        ideal_sample(st, in.omega_body, c, in.thrust, s.drag.mass, ts);
    const double c_obs =
        s.observer.c_mode == CoefficientMode::nominal ? c_bar : c;
    const ObserverDerivative od =
        observer_derivative(ob, ideal, c_obs, s.observer.gains);

    Vec11 dx;
    dx << td.du, td.dv, td.dw, td.deta, od.du_hat, od.dv_hat, od.deta_hat;
    return dx;
  };

  x = detail::rk4_step<11>(x, t, s.dt, f);
  if (!x.allFinite()) throw std::runtime_error("coupled step diverged");

  truth.u = x[0];
  truth.v = x[1];
  truth.w = x[2];
  truth.eta = x.segment<3>(3).normalized();
  obs.u_hat = x[5];
  obs.v_hat = x[6];
  obs.eta_hat = x.tail<3>();
}

struct ChannelAccumulator {
  double sum_sq = 0.0;
  int n = 0;
  void add(double e) {
    sum_sq += e * e;
    ++n;
  }
  double rmse() const { return n ? std::sqrt(sum_sq / n) : 0.0; }
};

std::optional<Angles> safe_angles(const Vec3& eta) {
  if (!(eta.norm() > 0.0) || !(eta.z() > 0.0)) return std::nullopt;
  return extract_angles(eta);
}

void finite_difference_wdot(RunRecord& rec) {
  const std::size_t n = rec.W.size();
  rec.wdot_fd.assign(n, 0.0);
  if (n < 3) return;
  const double dt = rec.dt;
  rec.wdot_fd[0] = (-3.0 * rec.W[0] + 4.0 * rec.W[1] - rec.W[2]) / (2.0 * dt);
  for (std::size_t k = 1; k + 1 < n; ++k)
    rec.wdot_fd[k] = (rec.W[k + 1] - rec.W[k - 1]) / (2.0 * dt);
  rec.wdot_fd[n - 1] =
      (3.0 * rec.W[n - 1] - 4.0 * rec.W[n - 2] + rec.W[n - 3]) / (2.0 * dt);
}

void compute_summary(RunRecord& rec, const Scenario& s) {
  RunSummary& sum = rec.summary;

  double last_init = 0.0;
  for (const auto& ev : s.reinit) last_init = std::max(last_init, ev.t);
  const double c_bar = s.drag.nominal_c();
  const double slow = slowest_eigenvalue_magnitude(s.observer.gains, c_bar);
  sum.window_start = last_init + (slow > 0.0 ? 3.0 / slow : 0.0);

  for (double c : rec.coriolis) {
    sum.coriolis_max = std::max(sum.coriolis_max, c);
    sum.coriolis_rms += c * c;
  }
  sum.coriolis_rms = rec.coriolis.empty()
                         ? 0.0
                         : std::sqrt(sum.coriolis_rms / rec.coriolis.size());
  sum.min_eta3 = 1.0;
  for (const auto& st : rec.truth)
    sum.min_eta3 = std::min(sum.min_eta3, st.eta.z());

  ChannelAccumulator eu, ev, ephi, etheta, ekf_u, ekf_v, ekf_phi, ekf_theta;
  double vel_sq = 0.0, ang_sq = 0.0;
  int vel_n = 0, ang_n = 0;

  for (std::size_t k = 0; k < rec.t.size(); ++k) {
    if (rec.t[k] < sum.window_start) continue;
    ++sum.window_samples;
    const TruthState& truth = rec.truth[k];
    const auto truth_ang = safe_angles(truth.eta);

    if (!rec.observer.empty()) {
      const ObserverState& o = rec.observer[k];
      eu.add(o.u_hat - truth.u);
      ev.add(o.v_hat - truth.v);
      vel_sq += ((o.u_hat - truth.u) * (o.u_hat - truth.u) +
                 (o.v_hat - truth.v) * (o.v_hat - truth.v)) /
                2.0;
      ++vel_n;
      sum.max_eta_norm_dev =
          std::max(sum.max_eta_norm_dev, std::abs(o.eta_hat.norm() - 1.0));
      const auto est_ang = safe_angles(o.eta_hat);
      if (truth_ang && est_ang) {
        const double dphi = (est_ang->phi - truth_ang->phi) * kRad2Deg;
        const double dtheta = (est_ang->theta - truth_ang->theta) * kRad2Deg;
        ephi.add(dphi);
        etheta.add(dtheta);
        ang_sq += (dphi * dphi + dtheta * dtheta) / 2.0;
        ++ang_n;
      }
    }
    if (!rec.ekf_mean.empty()) {
      const Vec5& m = rec.ekf_mean[k];
      ekf_u.add(m[0] - truth.u);
      ekf_v.add(m[1] - truth.v);
      const auto est_ang = safe_angles(m.tail<3>());
      if (truth_ang && est_ang) {
        ekf_phi.add((est_ang->phi - truth_ang->phi) * kRad2Deg);
        ekf_theta.add((est_ang->theta - truth_ang->theta) * kRad2Deg);
      }
    }
  }

  sum.rmse_u = eu.rmse();
  sum.rmse_v = ev.rmse();
  sum.rmse_phi_deg = ephi.rmse();
  sum.rmse_theta_deg = etheta.rmse();
  sum.rmse_vel = vel_n ? std::sqrt(vel_sq / vel_n) : 0.0;
  sum.rmse_angle_deg = ang_n ? std::sqrt(ang_sq / ang_n) : 0.0;
  if (!rec.ekf_mean.empty()) {
    sum.ekf_rmse_u = ekf_u.rmse();
    sum.ekf_rmse_v = ekf_v.rmse();
    sum.ekf_rmse_phi_deg = ekf_phi.rmse();
    sum.ekf_rmse_theta_deg = ekf_theta.rmse();
  }
  if (!rec.V.empty()) {
    sum.v_end = rec.V.back();
    sum.converged = sum.v_end < kConvergenceThreshold;
  }
}

}  // namespace

double slowest_eigenvalue_magnitude(const Gains& gains, double c_bar) {
  const LinearizedSubsystems sub = linearized_subsystems(gains, c_bar);
  const EigenPair p1 = subsystem_eigenvalues(sub.A1);
  const EigenPair p2 = subsystem_eigenvalues(sub.A2);
  double slow = std::abs(sub.a3);
  for (const auto& l : {p1.lambda1, p1.lambda2, p2.lambda1, p2.lambda2})
    slow = std::min(slow, std::abs(l.real()));
  return slow;
}

RunRecord run_scenario(const Scenario& s) {
  s.validate();
  const GainValidation gv = validate_gains(s.observer.gains);
  if (s.strict_gains && !gv.ok)
    throw std::invalid_argument(
        "run_scenario: gains fail validation (" + gv.describe() +
        "); set strict_gains=false (--force) to run anyway");

  const auto n_steps = static_cast<std::size_t>(std::llround(s.duration / s.dt));
  const double g = s.observer.gains.g;
  const double c_bar = s.drag.nominal_c();

  RunRecord rec;
  rec.dt = s.dt;
  rec.gains_valid = gv.ok;
  const bool bound_available = gv.ok && s.observer.gains.epsilon <= 0.8;

  rec.t.reserve(n_steps + 1);
  rec.truth.reserve(n_steps + 1);
  rec.c_true.reserve(n_steps + 1);
  rec.coriolis.reserve(n_steps + 1);
  rec.imu.reserve(n_steps + 1);
  if (s.run_observer) {
    rec.observer.reserve(n_steps + 1);
    rec.errors.reserve(n_steps + 1);
    rec.V.reserve(n_steps + 1);
    rec.W.reserve(n_steps + 1);
    rec.decay_bound.reserve(n_steps + 1);
  }

  TruthState truth = s.initial_state;
  truth.eta.normalize();

  ObserverState obs;
  if (s.observer_init) {
    obs = *s.observer_init;
  } else {
    obs.u_hat = truth.u;
    obs.v_hat = truth.v;
    obs.eta_hat = truth.eta;
  }

  ObserverConfig ocfg = s.observer;
  ocfg.dt = s.dt;

  NoiseChannelState noise(s.sensors);

  const EkfConfig ekf_cfg = default_ekf_config(s.sensors);
  EkfState ekf;
  ekf.mean << truth.u, truth.v, truth.eta;
  ekf.covariance = ekf_cfg.P0;

  auto profile = [&s](double t) { return s.inputs.eval(t); };
  std::vector<bool> reinit_done(s.reinit.size(), false);

  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * s.dt;

    for (std::size_t i = 0; i < s.reinit.size(); ++i) {
      if (!reinit_done[i] && s.reinit[i].t <= t + 0.5 * s.dt) {
        obs = apply_reinit(obs, s.reinit[i]);
        reinit_done[i] = true;
      }
    }

    const RateThrustInput in = s.inputs.eval(t);
    const double c_t = drag_coefficient(s.drag, in.motor_speeds);
    const ImuSample ideal =
        ideal_sample(truth, in.omega_body, c_t, in.thrust, s.drag.mass, t);
    const ImuSample meas = corrupt(ideal, s.sensors, noise, s.dt);

    rec.t.push_back(t);
    rec.truth.push_back(truth);
    rec.c_true.push_back(c_t);
    rec.coriolis.push_back(coriolis_norm(truth, in.omega_body));
    rec.imu.push_back(meas);
    if (s.run_observer) {
      rec.observer.push_back(obs);
      const ErrorCoordinates err = error_variables(truth, obs, s.observer.gains);
      rec.errors.push_back(err);
      const double V = lyapunov_V(err);
      rec.V.push_back(V);
      rec.W.push_back(lyapunov_W(V, s.observer.gains.epsilon));
      rec.decay_bound.push_back(
          bound_available ? w_decay_bound(err, s.observer.gains)
                          : std::numeric_limits<double>::quiet_NaN());
    }
    if (s.run_ekf) {
      rec.ekf_mean.push_back(ekf.mean);
      rec.ekf_cov_trace.push_back(ekf.covariance.trace());
    }

    if (k == n_steps) break;

    const double c_obs =
        s.observer.c_mode == CoefficientMode::nominal ? c_bar : c_t;

    try {
      if (s.timing == MeasurementTiming::coupled) {
        coupled_step(truth, obs, s, c_bar, t);
      } else {
        if (s.run_observer) obs = observer_step(obs, meas, ocfg, c_obs);
        truth = step_rk4(truth, profile, t, s.dt, s.drag, g, s.truth_model);
      }
      if (s.run_ekf) {
        ekf = ekf_predict(ekf, meas.omega, c_obs, g, s.dt, ekf_cfg.Q);
        ekf = ekf_update(ekf, meas.a.head<2>(), c_obs, ekf_cfg.R);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("run_scenario: aborted at step " +
                               std::to_string(k) + " (t=" + std::to_string(t) +
                               "): " + e.what() + "; " +
                               state_snapshot(truth, obs));
    }
  }

  if (s.run_observer) finite_difference_wdot(rec);
  compute_summary(rec, s);
  return rec;
}

std::string TheoryReport::describe() const {
  std::ostringstream os;
  switch (verdict) {
    case TheoryVerdict::pass:
      os << "PASS: decay bound held at every step (max margin " << max_margin
         << ")";
      break;
    case TheoryVerdict::fail:
      os << "FAIL: decay bound violated (max margin " << max_margin << ")";
      break;
    case TheoryVerdict::refused:
      os << "REFUSED: " << reason;
      if (refusal_time > 0.0) os << " at t=" << refusal_time;
      break;
    case TheoryVerdict::robustness_report:
      os << "ROBUSTNESS MODE: full model with active Coriolis terms, bound "
            "not asserted (max margin "
         << max_margin << ")";
      break;
  }
  os << "; V end " << v_end << ", V monotone " << (v_monotone ? "yes" : "no")
     << ", min eta3 " << min_eta3;
  return os.str();
}

TheoryReport theory_check(const Scenario& s, const RunRecord& rec) {
  TheoryReport rep;
  const Gains& gains = s.observer.gains;

  const GainValidation gv = validate_gains(gains);
  if (!gv.ok) {
    rep.reason = "gains fail validation: " + gv.describe();
    return rep;
  }
  if (!(gains.epsilon <= 0.8)) {
    rep.reason = "epsilon must be <= 0.8 for the W construction";
    return rep;
  }
  if (!s.sensors.is_ideal()) {
    rep.reason = "sensors must be ideal (no bias, no noise)";
    return rep;
  }
  if (rec.observer.empty()) {
    rep.reason = "scenario does not run the observer";
    return rep;
  }

  rep.min_eta3 = 1.0;
  for (std::size_t k = 0; k < rec.truth.size(); ++k) {
    rep.min_eta3 = std::min(rep.min_eta3, rec.truth[k].eta.z());
    if (rec.truth[k].eta.z() < gains.epsilon) {
      rep.reason = "truth eta3 dipped below epsilon";
      rep.refusal_time = rec.t[k];
      return rep;
    }
    if (rec.c_true[k] < gains.c_l || rec.c_true[k] > gains.c_u) {
      rep.reason = "drag coefficient left [c_l, c_u]";
      rep.refusal_time = rec.t[k];
      return rep;
    }
  }

  rep.v_end = rec.V.back();
  rep.v_monotone = true;
  for (std::size_t k = 0; k + 1 < rec.V.size(); ++k) {
    if (rec.V[k + 1] > rec.V[k] + kVMonotoneTol * (1.0 + rec.V[k])) {
      rep.v_monotone = false;
      break;
    }
  }

  rep.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < rec.W.size(); ++k) {
    const double margin =
        (rec.wdot_fd[k] - rec.decay_bound[k]) / (1.0 + std::abs(rec.W[k]));
    rep.max_margin = std::max(rep.max_margin, margin);
  }

  const double max_coriolis =
      *std::max_element(rec.coriolis.begin(), rec.coriolis.end());
  if (s.truth_model == TruthModel::full && max_coriolis > 0.0) {
    rep.verdict = TheoryVerdict::robustness_report;
    rep.reason = "full-model truth with nonzero Coriolis terms";
    return rep;
  }

  rep.verdict = rep.max_margin <= kTheoryMarginTol ? TheoryVerdict::pass
                                                   : TheoryVerdict::fail;
  return rep;
}

TheoryReport theory_check(const Scenario& s) {
  const GainValidation gv = validate_gains(s.observer.gains);
  TheoryReport rep;
  if (!gv.ok) {
    rep.reason = "gains fail validation: " + gv.describe();
    return rep;
  }
  if (!s.sensors.is_ideal()) {
    rep.reason = "sensors must be ideal (no bias, no noise)";
    return rep;
  }
  return theory_check(s, run_scenario(s));
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

namespace {

double angle_or_nan(const Vec3& eta, bool phi) {
  const auto a = safe_angles(eta);
  if (!a) return std::numeric_limits<double>::quiet_NaN();
  return (phi ? a->phi : a->theta) * kRad2Deg;
}

}  // namespace

std::string summary_json(const RunRecord& rec, const Scenario& s) {
  nlohmann::json j;
  const RunSummary& sum = rec.summary;
  j["scenario"] = s.name;
  j["duration"] = s.duration;
  j["dt"] = rec.dt;
  j["steps"] = rec.t.size();
  j["gains_valid"] = rec.gains_valid;
  j["window_start"] = sum.window_start;
  j["window_samples"] = sum.window_samples;
  j["coriolis_max"] = sum.coriolis_max;
  j["coriolis_rms"] = sum.coriolis_rms;
  j["min_eta3"] = sum.min_eta3;
  if (!rec.observer.empty()) {
    j["observer"] = {{"rmse_u", sum.rmse_u},
                     {"rmse_v", sum.rmse_v},
                     {"rmse_phi_deg", sum.rmse_phi_deg},
                     {"rmse_theta_deg", sum.rmse_theta_deg},
                     {"rmse_vel", sum.rmse_vel},
                     {"rmse_angle_deg", sum.rmse_angle_deg},
                     {"max_eta_norm_dev", sum.max_eta_norm_dev},
                     {"v_end", sum.v_end},
                     {"converged", sum.converged}};
  }
  if (!rec.ekf_mean.empty()) {
    j["ekf"] = {{"rmse_u", sum.ekf_rmse_u.value_or(0.0)},
                {"rmse_v", sum.ekf_rmse_v.value_or(0.0)},
                {"rmse_phi_deg", sum.ekf_rmse_phi_deg.value_or(0.0)},
                {"rmse_theta_deg", sum.ekf_rmse_theta_deg.value_or(0.0)},
                {"cov_trace_end", rec.ekf_cov_trace.back()}};
  }
  return j.dump(2) + "\n";
}

void write_run_outputs(const RunRecord& rec, const Scenario& s,
                       const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  {
    CsvWriter truth(dir / "truth.csv",
                    "t,u,v,w,eta1,eta2,eta3,phi_deg,theta_deg,c,coriolis_norm");
    for (std::size_t k = 0; k < rec.t.size(); ++k) {
      const TruthState& st = rec.truth[k];
      truth.row({rec.t[k], st.u, st.v, st.w, st.eta.x(), st.eta.y(),
                 st.eta.z(), angle_or_nan(st.eta, true),
                 angle_or_nan(st.eta, false), rec.c_true[k], rec.coriolis[k]});
    }
  }
  {
    CsvWriter imu(dir / "imu.csv", "t,ax,ay,az,gx,gy,gz");
    for (const auto& m : rec.imu)
      imu.row({m.t, m.a.x(), m.a.y(), m.a.z(), m.omega.x(), m.omega.y(),
               m.omega.z()});
  }
  if (!rec.observer.empty()) {
    CsvWriter est(dir / "observer_estimate.csv",
                  "t,u_hat,v_hat,eta1_hat,eta2_hat,eta3_hat,phi_hat_deg,"
                  "theta_hat_deg");
    for (std::size_t k = 0; k < rec.t.size(); ++k) {
      const ObserverState& o = rec.observer[k];
      est.row({rec.t[k], o.u_hat, o.v_hat, o.eta_hat.x(), o.eta_hat.y(),
               o.eta_hat.z(), angle_or_nan(o.eta_hat, true),
               angle_or_nan(o.eta_hat, false)});
    }

    CsvWriter diag(dir / "diagnostics.csv",
                   "t,V,W,Wdot_fd,decay_bound,e_u,e_v,z1,z2,z3,eta_err_norm");
    for (std::size_t k = 0; k < rec.t.size(); ++k) {
      const ErrorCoordinates& e = rec.errors[k];
      const double eta_err =
          (rec.observer[k].eta_hat - rec.truth[k].eta).norm();
      diag.row({rec.t[k], rec.V[k], rec.W[k], rec.wdot_fd[k],
                rec.decay_bound[k], e.e_u, e.e_v, e.z1, e.z2, e.z3, eta_err});
    }
  }
  if (!rec.ekf_mean.empty()) {
    CsvWriter est(dir / "ekf_estimate.csv",
                  "t,u_hat,v_hat,eta1_hat,eta2_hat,eta3_hat,phi_hat_deg,"
                  "theta_hat_deg,cov_trace");
    for (std::size_t k = 0; k < rec.t.size(); ++k) {
      const Vec5& m = rec.ekf_mean[k];
      const Vec3 eta = m.tail<3>();
      est.row({rec.t[k], m[0], m[1], eta.x(), eta.y(), eta.z(),
               angle_or_nan(eta, true), angle_or_nan(eta, false),
               rec.ekf_cov_trace[k]});
    }
  }

  std::ofstream summary(dir / "summary.json");
  summary << summary_json(rec, s);
}

}  // namespace dragobs
