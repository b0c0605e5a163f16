#include "dragobs/sensors.hpp"

#include <cmath>
#include <stdexcept>

namespace dragobs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// One standard Gaussian via Box-Muller on uniforms built from raw 64-bit
// draws; avoids std::normal_distribution, whose output is
// implementation-defined.
double gaussian(std::mt19937_64& rng) {
  const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;       // [0,1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace

NoiseChannelState::NoiseChannelState(const SensorConfig& cfg) {
  for (std::size_t ch = 0; ch < rng_.size(); ++ch)
    rng_[ch].seed(splitmix64(cfg.seed * 0x9E3779B97F4A7C15ULL + ch + 1));
}

Eigen::Matrix<double, 6, 1> NoiseChannelState::advance(const SensorConfig& cfg,
                                                       double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("NoiseChannelState: dt must be > 0");
  if (cfg.noise_power == 0.0) return filter_;
  if (!(cfg.noise_sample_time > 0.0) || !(cfg.lowpass_cutoff > 0.0))
    throw std::invalid_argument("NoiseChannelState: bad noise config");

  const double ts = cfg.noise_sample_time;
  const auto substeps = std::max<long long>(1, std::llround(dt / ts));
  const double sigma = std::sqrt(cfg.noise_power / ts);
  const double pole = std::exp(-kTwoPi * cfg.lowpass_cutoff * ts);

  for (int ch = 0; ch < 6; ++ch) {
    double y = filter_[ch];
    for (long long i = 0; i < substeps; ++i)
      y = pole * y + (1.0 - pole) * sigma * gaussian(rng_[ch]);
    filter_[ch] = y;
  }
  return filter_;
}

ImuSample ideal_sample(const TruthState& s, const Vec3& omega_body, double c,
                       double thrust, double mass, double t) {
  if (!(c >= 0.0)) throw std::invalid_argument("ideal_sample: c must be >= 0");
  ImuSample m;
  m.t = t;
  m.a = Vec3(-c * s.u, -c * s.v, -thrust / mass);
  m.omega = omega_body;
  return m;
}

ImuSample corrupt(const ImuSample& sample, const SensorConfig& cfg,
                  NoiseChannelState& ch, double dt) {
  if (cfg.is_ideal()) return sample;

  ImuSample out = sample;
  out.a.x() += cfg.accel_bias.x();
  out.a.y() += cfg.accel_bias.y();
  out.omega += cfg.gyro_bias;

  if (cfg.noise_power > 0.0) {
    const auto noise = ch.advance(cfg, dt);
    out.a += noise.head<3>();
    out.omega += noise.tail<3>();
  }
  return out;
}

double filtered_noise_variance(const SensorConfig& cfg) {
  if (cfg.noise_power == 0.0) return 0.0;
  const double var_white = cfg.noise_power / cfg.noise_sample_time;
  const double pole = std::exp(-kTwoPi * cfg.lowpass_cutoff * cfg.noise_sample_time);
  return var_white * (1.0 - pole) / (1.0 + pole);
}

}  // namespace dragobs
