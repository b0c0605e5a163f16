#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "dragobs/types.hpp"

namespace dragobs {

// Sensor imperfection model: constant biases on the five channels the
// observer consumes (ax, ay, p, q, r) plus band-limited Gaussian noise on
// all six channels. The noise is realized as white samples of variance
// noise_power / noise_sample_time drawn at rate 1/noise_sample_time and
// passed through a first-order low-pass (exact zero-order-hold pole
// mapping) at lowpass_cutoff.
struct SensorConfig {
  Eigen::Vector2d accel_bias = Eigen::Vector2d::Zero();  // (b_u, b_v) [m/s^2]
  Vec3 gyro_bias = Vec3::Zero();                         // (b_p, b_q, b_r) [rad/s]
  double noise_power = 0.0;        // PSD [unit^2 * s]
  double noise_sample_time = 1e-4; // [s]
  double lowpass_cutoff = 1000.0;  // [Hz]
  std::uint64_t seed = 0;

  bool is_ideal() const {
    return noise_power == 0.0 && accel_bias.isZero(0.0) && gyro_bias.isZero(0.0);
  }
};

// Per-channel filter and RNG state for the six noise channels
// (ax, ay, az, gx, gy, gz). Evolution is deterministic given the seed;
// mt19937_64 with an explicit Box-Muller transform keeps the streams
// reproducible across platforms.
class NoiseChannelState {
 public:
  explicit NoiseChannelState(const SensorConfig& cfg);

  // Advances every channel by dt (in substeps of noise_sample_time) and
  // returns the filtered noise values at the end of the interval.
  Eigen::Matrix<double, 6, 1> advance(const SensorConfig& cfg, double dt);

 private:
  std::array<std::mt19937_64, 6> rng_;
  Eigen::Matrix<double, 6, 1> filter_ = Eigen::Matrix<double, 6, 1>::Zero();
};

// Ideal measurement model: a = (-c u, -c v, -T/m), omega = (p, q, r).
ImuSample ideal_sample(const TruthState& s, const Vec3& omega_body, double c,
                       double thrust, double mass, double t);

// Applies biases and noise per the config; identity for an all-zero config.
ImuSample corrupt(const ImuSample& sample, const SensorConfig& cfg,
                  NoiseChannelState& ch, double dt);

// Stationary variance of one filtered noise channel, used for tests and for
// deriving the EKF measurement covariance.
double filtered_noise_variance(const SensorConfig& cfg);

}  // namespace dragobs
