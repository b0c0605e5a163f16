#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dragobs/dynamics.hpp"
#include "dragobs/observer.hpp"
#include "dragobs/sensors.hpp"
#include "dragobs/types.hpp"

namespace dragobs {

// A scalar input channel built from summed primitives.
struct ProfileTerm {
  enum class Kind { constant, sinusoid, piecewise_linear };
  Kind kind = Kind::constant;

  double value = 0.0;  // constant

  double amplitude = 0.0;  // sinusoid: amplitude * sin(2 pi f t + phase)
  double frequency_hz = 0.0;
  double phase_rad = 0.0;

  std::vector<double> times;  // piecewise-linear knots (strictly increasing),
  std::vector<double> values; // clamped outside the knot range

  double eval(double t) const;
};

struct ScalarProfile {
  std::vector<ProfileTerm> terms;

  double eval(double t) const;

  static ScalarProfile constant(double v);
  static ScalarProfile sinusoid(double amplitude, double frequency_hz,
                                double phase_rad, double offset = 0.0);
};

struct InputProfile {
  ScalarProfile p, q, r;
  ScalarProfile thrust;
  std::array<ScalarProfile, 4> motor_speeds;

  RateThrustInput eval(double t) const;
};

// How estimators are coupled to the truth during integration:
//  - sampled: the truth integrates the continuous input profiles while
//    estimators receive zero-order-held measurements at the step times
//    (the realistic discrete pipeline);
//  - coupled: truth and observer integrate as one ODE with measurements
//    evaluated at the RK4 stage times. This is the discretization used to
//    verify the continuous-time decay bound; it requires ideal sensors.
enum class MeasurementTiming { sampled, coupled };

struct ReinitEvent {
  double t = 0.0;
  std::optional<double> u_hat, v_hat;
  std::optional<Vec3> eta_hat;
  // Alternative attitude override: eta_hat built from roll/pitch (degrees).
  std::optional<double> phi_deg, theta_deg;
};

struct Scenario {
  std::string name = "unnamed";
  std::string description;
  double duration = 30.0;  // [s]
  double dt = 1e-3;        // [s]
  TruthModel truth_model = TruthModel::full;
  MeasurementTiming timing = MeasurementTiming::sampled;

  TruthState initial_state;
  DragParams drag;
  InputProfile inputs;
  SensorConfig sensors;
  ObserverConfig observer;
  // Default observer start: the truth initial state (zero error).
  std::optional<ObserverState> observer_init;
  std::vector<ReinitEvent> reinit;

  bool run_observer = true;
  bool run_ekf = false;
  // When set, runs refuse gains that fail validate_gains.
  bool strict_gains = true;

  // Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

// Unit-sphere eta from roll/pitch in radians:
// (eta1, eta2, eta3) = (-sin th, sin ph cos th, cos ph cos th).
Vec3 eta_from_angles(double phi, double theta);

// JSON round trip (schema documented in the README).
Scenario parse_scenario(const std::string& json_text);
std::string scenario_json(const Scenario& s);

std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

// Resolves a file path first, then a built-in name.
Scenario load_scenario(const std::string& path_or_name);

}  // namespace dragobs
