#include "dragobs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dragobs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

double ProfileTerm::eval(double t) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::sinusoid:
      return amplitude * std::sin(kTwoPi * frequency_hz * t + phase_rad);
    case Kind::piecewise_linear: {
      if (times.empty()) return 0.0;
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times.begin());
      const double t0 = times[i - 1], t1 = times[i];
      const double w = (t - t0) / (t1 - t0);
      return values[i - 1] + w * (values[i] - values[i - 1]);
    }
  }
  return 0.0;
}

double ScalarProfile::eval(double t) const {
  double sum = 0.0;
  for (const auto& term : terms) sum += term.eval(t);
  return sum;
}

ScalarProfile ScalarProfile::constant(double v) {
  ProfileTerm term;
  term.kind = ProfileTerm::Kind::constant;
  term.value = v;
  return {{term}};
}

ScalarProfile ScalarProfile::sinusoid(double amplitude, double frequency_hz,
                                      double phase_rad, double offset) {
  ScalarProfile p;
  if (offset != 0.0) p = constant(offset);
  ProfileTerm term;
  term.kind = ProfileTerm::Kind::sinusoid;
  term.amplitude = amplitude;
  term.frequency_hz = frequency_hz;
  term.phase_rad = phase_rad;
  p.terms.push_back(term);
  return p;
}

RateThrustInput InputProfile::eval(double t) const {
  RateThrustInput in;
  in.omega_body = Vec3(p.eval(t), q.eval(t), r.eval(t));
  in.thrust = thrust.eval(t);
  for (int i = 0; i < 4; ++i) in.motor_speeds[i] = motor_speeds[i].eval(t);
  return in;
}

Vec3 eta_from_angles(double phi, double theta) {
  return Vec3(-std::sin(theta), std::sin(phi) * std::cos(theta),
              std::cos(phi) * std::cos(theta));
}

void Scenario::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("scenario: " + msg);
  };
  if (!(duration > 0.0)) fail("duration must be > 0");
  if (!(dt > 0.0) || dt > duration) fail("dt must be in (0, duration]");
  if (!(drag.lambda > 0.0) || !(drag.mass > 0.0) || !(drag.omega_bar > 0.0))
    fail("drag parameters must be positive");
  if (!initial_state.finite()) fail("initial state must be finite");
  if (std::abs(initial_state.eta.norm() - 1.0) > 1e-6)
    fail("initial eta must be on the unit sphere");
  if (sensors.noise_power < 0.0) fail("noise_power must be >= 0");
  if (!(sensors.noise_sample_time > 0.0)) fail("noise_sample_time must be > 0");
  if (!(sensors.lowpass_cutoff > 0.0)) fail("lowpass_cutoff must be > 0");
  if (timing == MeasurementTiming::coupled && !sensors.is_ideal())
    fail("coupled timing requires ideal sensors");
  if (!run_observer && !run_ekf) fail("at least one estimator must run");
  for (const auto& ev : reinit) {
    if (ev.t < 0.0 || ev.t > duration) fail("reinit event outside [0, duration]");
    if (ev.eta_hat && (ev.phi_deg || ev.theta_deg))
      fail("reinit event: give eta_hat or angles, not both");
  }
  for (const auto* prof : {&inputs.p, &inputs.q, &inputs.r, &inputs.thrust,
                           &inputs.motor_speeds[0], &inputs.motor_speeds[1],
                           &inputs.motor_speeds[2], &inputs.motor_speeds[3]}) {
    for (const auto& term : prof->terms) {
      if (term.kind == ProfileTerm::Kind::piecewise_linear) {
        if (term.times.size() != term.values.size() || term.times.empty())
          fail("piecewise-linear term needs matching, nonempty knots");
        if (!std::is_sorted(term.times.begin(), term.times.end()) ||
            std::adjacent_find(term.times.begin(), term.times.end()) !=
                term.times.end())
          fail("piecewise-linear knots must be strictly increasing");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json term_to_json(const ProfileTerm& t) {
  switch (t.kind) {
    case ProfileTerm::Kind::constant:
      return {{"type", "constant"}, {"value", t.value}};
    case ProfileTerm::Kind::sinusoid:
      return {{"type", "sinusoid"},
              {"amplitude", t.amplitude},
              {"frequency_hz", t.frequency_hz},
              {"phase_rad", t.phase_rad}};
    case ProfileTerm::Kind::piecewise_linear:
      return {{"type", "piecewise_linear"},
              {"times", t.times},
              {"values", t.values}};
  }
  throw std::logic_error("unreachable");
}

ProfileTerm term_from_json(const json& j) {
  ProfileTerm t;
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") {
    t.kind = ProfileTerm::Kind::constant;
    t.value = j.at("value").get<double>();
  } else if (type == "sinusoid") {
    t.kind = ProfileTerm::Kind::sinusoid;
    t.amplitude = j.at("amplitude").get<double>();
    t.frequency_hz = j.at("frequency_hz").get<double>();
    t.phase_rad = j.value("phase_rad", 0.0);
  } else if (type == "piecewise_linear") {
    t.kind = ProfileTerm::Kind::piecewise_linear;
    t.times = j.at("times").get<std::vector<double>>();
    t.values = j.at("values").get<std::vector<double>>();
  } else {
    throw std::invalid_argument("unknown profile term type: " + type);
  }
  return t;
}

json profile_to_json(const ScalarProfile& p) {
  json arr = json::array();
  for (const auto& t : p.terms) arr.push_back(term_to_json(t));
  return arr;
}

ScalarProfile profile_from_json(const json& j) {
  ScalarProfile p;
  for (const auto& t : j) p.terms.push_back(term_from_json(t));
  return p;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json gains_to_json(const Gains& g) {
  return {{"k1", g.k1},   {"k2", g.k2},   {"k3", g.k3},
          {"ku", g.ku},   {"kv", g.kv},   {"epsilon", g.epsilon},
          {"c_l", g.c_l}, {"c_u", g.c_u}, {"g", g.g}};
}

Gains gains_from_json(const json& j) {
  Gains g;
  g.k1 = j.at("k1").get<double>();
  g.k2 = j.at("k2").get<double>();
  g.k3 = j.at("k3").get<double>();
  g.ku = j.at("ku").get<double>();
  g.kv = j.at("kv").get<double>();
  g.epsilon = j.value("epsilon", 0.1);
  g.c_l = j.value("c_l", 0.2);
  g.c_u = j.value("c_u", 0.3);
  g.g = j.value("g", 9.81);
  return g;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  const json j = json::parse(json_text);
  Scenario s;
  s.name = j.value("name", std::string("unnamed"));
  s.description = j.value("description", std::string());
  s.duration = j.at("duration").get<double>();
  s.dt = j.value("dt", 1e-3);
  s.truth_model =
      j.value("truth_model", std::string("full")) == "design" ? TruthModel::design
                                                              : TruthModel::full;
  s.timing = j.value("measurement_timing", std::string("sampled")) == "coupled"
                 ? MeasurementTiming::coupled
                 : MeasurementTiming::sampled;

  if (j.contains("initial_state")) {
    const auto& is = j.at("initial_state");
    s.initial_state.u = is.value("u", 0.0);
    s.initial_state.v = is.value("v", 0.0);
    s.initial_state.w = is.value("w", 0.0);
    if (is.contains("eta")) s.initial_state.eta = vec3_from_json(is.at("eta"));
  }

  if (j.contains("drag")) {
    const auto& d = j.at("drag");
    s.drag.lambda = d.value("lambda", s.drag.lambda);
    s.drag.mass = d.value("mass", s.drag.mass);
    s.drag.omega_bar = d.value("omega_bar", s.drag.omega_bar);
  }

  const auto& in = j.at("inputs");
  s.inputs.p = profile_from_json(in.value("p", json::array()));
  s.inputs.q = profile_from_json(in.value("q", json::array()));
  s.inputs.r = profile_from_json(in.value("r", json::array()));
  s.inputs.thrust = profile_from_json(in.at("thrust"));
  const auto& motors = in.at("motor_speeds");
  if (!motors.is_array() || motors.size() != 4)
    throw std::invalid_argument("inputs.motor_speeds must hold 4 profiles");
  for (int i = 0; i < 4; ++i)
    s.inputs.motor_speeds[i] = profile_from_json(motors[i]);

  if (j.contains("sensors")) {
    const auto& sj = j.at("sensors");
    if (sj.contains("accel_bias")) {
      const auto& b = sj.at("accel_bias");
      s.sensors.accel_bias = Eigen::Vector2d(b.at(0).get<double>(),
                                             b.at(1).get<double>());
    }
    if (sj.contains("gyro_bias")) s.sensors.gyro_bias = vec3_from_json(sj.at("gyro_bias"));
    s.sensors.noise_power = sj.value("noise_power", 0.0);
    s.sensors.noise_sample_time = sj.value("noise_sample_time", 1e-4);
    s.sensors.lowpass_cutoff = sj.value("lowpass_cutoff", 1000.0);
    s.sensors.seed = sj.value("seed", std::uint64_t{0});
  }

  const auto& oj = j.at("observer");
  s.observer.gains = gains_from_json(oj.at("gains"));
  s.observer.c_mode = oj.value("c_mode", std::string("true")) == "nominal"
                          ? CoefficientMode::nominal
                          : CoefficientMode::true_coefficient;
  s.observer.integration = oj.value("integration", std::string("rk4")) == "euler"
                               ? ObserverIntegrator::euler
                               : ObserverIntegrator::rk4;
  s.observer.dt = s.dt;
  if (oj.contains("init")) {
    ObserverState o;
    const auto& ij = oj.at("init");
    o.u_hat = ij.value("u_hat", 0.0);
    o.v_hat = ij.value("v_hat", 0.0);
    if (ij.contains("eta_hat")) o.eta_hat = vec3_from_json(ij.at("eta_hat"));
    s.observer_init = o;
  }

  for (const auto& ej : j.value("reinit", json::array())) {
    ReinitEvent ev;
    ev.t = ej.at("t").get<double>();
    if (ej.contains("u_hat")) ev.u_hat = ej.at("u_hat").get<double>();
    if (ej.contains("v_hat")) ev.v_hat = ej.at("v_hat").get<double>();
    if (ej.contains("eta_hat")) ev.eta_hat = vec3_from_json(ej.at("eta_hat"));
    if (ej.contains("phi_deg")) ev.phi_deg = ej.at("phi_deg").get<double>();
    if (ej.contains("theta_deg")) ev.theta_deg = ej.at("theta_deg").get<double>();
    s.reinit.push_back(ev);
  }

  if (j.contains("estimators")) {
    s.run_observer = false;
    s.run_ekf = false;
    for (const auto& e : j.at("estimators")) {
      const std::string name = e.get<std::string>();
      if (name == "observer") s.run_observer = true;
      else if (name == "ekf") s.run_ekf = true;
      else throw std::invalid_argument("unknown estimator: " + name);
    }
  }
  s.strict_gains = j.value("strict_gains", true);

  s.validate();
  return s;
}

std::string scenario_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["duration"] = s.duration;
  j["dt"] = s.dt;
  j["truth_model"] = s.truth_model == TruthModel::design ? "design" : "full";
  j["measurement_timing"] =
      s.timing == MeasurementTiming::coupled ? "coupled" : "sampled";
  j["initial_state"] = {{"u", s.initial_state.u},
                        {"v", s.initial_state.v},
                        {"w", s.initial_state.w},
                        {"eta", vec3_to_json(s.initial_state.eta)}};
  j["drag"] = {{"lambda", s.drag.lambda},
               {"mass", s.drag.mass},
               {"omega_bar", s.drag.omega_bar}};
  j["inputs"] = {{"p", profile_to_json(s.inputs.p)},
                 {"q", profile_to_json(s.inputs.q)},
                 {"r", profile_to_json(s.inputs.r)},
                 {"thrust", profile_to_json(s.inputs.thrust)},
                 {"motor_speeds",
                  json::array({profile_to_json(s.inputs.motor_speeds[0]),
                               profile_to_json(s.inputs.motor_speeds[1]),
                               profile_to_json(s.inputs.motor_speeds[2]),
                               profile_to_json(s.inputs.motor_speeds[3])})}};
  j["sensors"] = {
      {"accel_bias", {s.sensors.accel_bias.x(), s.sensors.accel_bias.y()}},
      {"gyro_bias", vec3_to_json(s.sensors.gyro_bias)},
      {"noise_power", s.sensors.noise_power},
      {"noise_sample_time", s.sensors.noise_sample_time},
      {"lowpass_cutoff", s.sensors.lowpass_cutoff},
      {"seed", s.sensors.seed}};
  j["observer"] = {
      {"gains", gains_to_json(s.observer.gains)},
      {"c_mode",
       s.observer.c_mode == CoefficientMode::nominal ? "nominal" : "true"},
      {"integration",
       s.observer.integration == ObserverIntegrator::euler ? "euler" : "rk4"}};
  if (s.observer_init) {
    j["observer"]["init"] = {{"u_hat", s.observer_init->u_hat},
                             {"v_hat", s.observer_init->v_hat},
                             {"eta_hat", vec3_to_json(s.observer_init->eta_hat)}};
  }
  if (!s.reinit.empty()) {
    json arr = json::array();
    for (const auto& ev : s.reinit) {
      json e = {{"t", ev.t}};
      if (ev.u_hat) e["u_hat"] = *ev.u_hat;
      if (ev.v_hat) e["v_hat"] = *ev.v_hat;
      if (ev.eta_hat) e["eta_hat"] = vec3_to_json(*ev.eta_hat);
      if (ev.phi_deg) e["phi_deg"] = *ev.phi_deg;
      if (ev.theta_deg) e["theta_deg"] = *ev.theta_deg;
      arr.push_back(e);
    }
    j["reinit"] = arr;
  }
  json est = json::array();
  if (s.run_observer) est.push_back("observer");
  if (s.run_ekf) est.push_back("ekf");
  j["estimators"] = est;
  j["strict_gains"] = s.strict_gains;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

namespace {

// Four motors with visibly large swings whose sum stays nearly constant
// (amplitude-mismatched antiphase pairs), so c(t) varies only slightly.
std::array<ScalarProfile, 4> motor_profiles(double omega_bar, double rel_swing,
                                            double freq_hz) {
  const double mismatch = 0.02 * rel_swing;
  return {ScalarProfile::sinusoid(omega_bar * rel_swing, freq_hz, 0.0, omega_bar),
          ScalarProfile::sinusoid(omega_bar * (rel_swing - mismatch), freq_hz,
                                  M_PI, omega_bar),
          ScalarProfile::sinusoid(omega_bar * rel_swing, freq_hz * 0.85,
                                  M_PI / 2, omega_bar),
          ScalarProfile::sinusoid(omega_bar * (rel_swing - mismatch),
                                  freq_hz * 0.85, M_PI / 2 + M_PI, omega_bar)};
}

Gains paper_gains() {
  Gains g;
  g.k1 = 7.0;
  g.k2 = 7.0;
  g.k3 = 0.1;
  g.ku = 49.0;
  g.kv = 49.0;
  g.epsilon = 0.1;
  g.c_l = 0.2;
  g.c_u = 0.3;
  g.g = 9.81;
  return g;
}

// Stiffer gains for the theory scenarios: the eta subsystem pole
// -k3/(1-eps^2) ~ -1 lets V reach 1e-8 well inside a 30 s run even from
// large initial errors.
Gains theory_gains() {
  Gains g;
  g.k1 = 55.0;
  g.k2 = 55.0;
  g.k3 = 1.0;
  g.ku = 52.0;
  g.kv = 52.0;
  g.epsilon = 0.1;
  g.c_l = 0.2;
  g.c_u = 0.3;
  g.g = 9.81;
  return g;
}

Scenario make_hover_ideal() {
  Scenario s;
  s.name = "hover-ideal";
  s.description = "hover equilibrium, ideal sensors, zero initial error";
  s.duration = 40.0;
  s.inputs.p = ScalarProfile::constant(0.0);
  s.inputs.q = ScalarProfile::constant(0.0);
  s.inputs.r = ScalarProfile::constant(0.0);
  s.inputs.thrust = ScalarProfile::constant(s.drag.mass * 9.81);
  for (auto& m : s.inputs.motor_speeds)
    m = ScalarProfile::constant(s.drag.omega_bar);
  s.observer.gains = paper_gains();
  s.observer.c_mode = CoefficientMode::true_coefficient;
  return s;
}

Scenario make_paper_v() {
  Scenario s;
  s.name = "paper-v";
  s.description =
      "moderately dynamic trajectory with the reference biases, noise, gains "
      "and the t=5 s reinitialization";
  s.duration = 45.0;
  s.inputs.p = ScalarProfile::sinusoid(0.35, 0.10, 0.3);
  s.inputs.q = ScalarProfile::sinusoid(0.30, 0.13, 1.1);
  s.inputs.r = ScalarProfile::sinusoid(0.25, 0.07, 2.0);
  s.inputs.thrust = ScalarProfile::sinusoid(0.35, 0.09, 0.0, s.drag.mass * 9.81);
  s.inputs.motor_speeds = motor_profiles(s.drag.omega_bar, 0.15, 0.5);
  s.sensors.accel_bias = Eigen::Vector2d(0.05, 0.04);
  s.sensors.gyro_bias = Vec3(0.02, -0.015, 0.01);
  s.sensors.noise_power = 1e-5;
  s.sensors.noise_sample_time = 1e-4;
  s.sensors.lowpass_cutoff = 1000.0;
  s.sensors.seed = 42;
  s.observer.gains = paper_gains();
  s.observer.c_mode = CoefficientMode::nominal;
  ReinitEvent ev;
  ev.t = 5.0;
  ev.u_hat = -4.0;
  ev.v_hat = -3.0;
  ev.phi_deg = -60.0;
  ev.theta_deg = 60.0;
  s.reinit.push_back(ev);
  return s;
}

Scenario make_aggressive() {
  Scenario s;
  s.name = "aggressive";
  s.description =
      "large rates and thrust swings; sizable Coriolis terms for the "
      "robustness ablation";
  s.duration = 30.0;
  s.inputs.p = ScalarProfile::sinusoid(1.10, 0.20, 0.0);
  s.inputs.q = ScalarProfile::sinusoid(0.90, 0.17, 1.0);
  s.inputs.r = ScalarProfile::sinusoid(0.70, 0.23, 2.1);
  s.inputs.thrust = ScalarProfile::sinusoid(1.8, 0.25, 0.5, s.drag.mass * 9.81);
  s.inputs.motor_speeds = motor_profiles(s.drag.omega_bar, 0.35, 0.6);
  s.sensors.accel_bias = Eigen::Vector2d(0.05, 0.04);
  s.sensors.gyro_bias = Vec3(0.02, -0.015, 0.01);
  s.sensors.noise_power = 1e-5;
  s.sensors.noise_sample_time = 1e-4;
  s.sensors.lowpass_cutoff = 1000.0;
  s.sensors.seed = 42;
  s.observer.gains = paper_gains();
  s.observer.c_mode = CoefficientMode::nominal;
  return s;
}

Scenario make_design_model() {
  Scenario s;
  s.name = "design-model";
  s.description =
      "design-model truth (no Coriolis), ideal sensors, coupled integration; "
      "the fixture for the Lyapunov decay check";
  s.duration = 30.0;
  s.truth_model = TruthModel::design;
  s.timing = MeasurementTiming::coupled;
  s.initial_state.u = 1.0;
  s.initial_state.v = -0.5;
  s.inputs.p = ScalarProfile::sinusoid(0.30, 0.05, 0.0);
  s.inputs.q = ScalarProfile::sinusoid(0.25, 0.08, 1.0);
  s.inputs.r = ScalarProfile::sinusoid(0.20, 0.03, 0.0, 0.60);
  s.inputs.thrust = ScalarProfile::constant(s.drag.mass * 9.81);
  for (auto& m : s.inputs.motor_speeds)
    m = ScalarProfile::sinusoid(s.drag.omega_bar * 0.08, 0.04, 0.0,
                                s.drag.omega_bar);
  s.observer.gains = theory_gains();
  s.observer.c_mode = CoefficientMode::true_coefficient;
  ObserverState init;
  init.u_hat = 2.5;
  init.v_hat = -2.0;
  init.eta_hat = Vec3(0.5, -0.4, 0.3);
  s.observer_init = init;
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"hover-ideal", "paper-v", "aggressive", "design-model"};
}

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  if (name == "hover-ideal") s = make_hover_ideal();
  else if (name == "paper-v") s = make_paper_v();
  else if (name == "aggressive") s = make_aggressive();
  else if (name == "design-model") s = make_design_model();
  else throw std::invalid_argument("unknown built-in scenario: " + name);
  s.observer.dt = s.dt;
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path_or_name) {
  if (std::filesystem::exists(path_or_name)) {
    std::ifstream in(path_or_name);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path_or_name);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
  }
  return builtin_scenario(path_or_name);
}

}  // namespace dragobs
