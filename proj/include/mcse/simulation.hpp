#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcse/array.hpp"
#include "mcse/wave.hpp"

namespace mcse {

// Built-in deterministic source signals.
enum class SignalKind {
  kSpeechLike,  // voiced/fricative bursts separated by pauses
  kWhiteNoise,
  kSilence,
};

SignalKind parse_signal_kind(const std::string& name);
std::string to_string(SignalKind kind);

std::vector<double> generate_signal(SignalKind kind, std::size_t length, double sample_rate,
                                    std::uint64_t seed);

// Per-channel sensor phase response: piecewise-linear in frequency through
// (frequency_hz, radians) knots, constant beyond the ends. One knot means a
// frequency-constant offset.
struct PhaseProfile {
  std::vector<double> frequency_hz;
  std::vector<double> radians;

  static PhaseProfile constant(double radians);
  double at(double frequency) const;
};

struct PointSource {
  SignalKind kind = SignalKind::kSpeechLike;
  std::vector<double> samples;  // overrides `kind` when non-empty
  Vec3 position;
  double snr_db = 0.0;  // interferers: level relative to the target at channel 0
};

struct SceneSpec {
  ArrayGeometry geometry = ArrayGeometry::tablet();
  double sample_rate = 16000.0;
  double duration_seconds = 4.0;
  PointSource target;
  double target_rms = 0.05;  // at channel 0
  // Diffuse-noise level relative to the target at channel 0; omitted means none.
  std::optional<double> diffuse_snr_db = 0.0;
  std::size_t plane_waves = 128;
  std::optional<PointSource> interferer;
  // Spatially white sensor noise relative to the target at channel 0.
  std::optional<double> sensor_noise_snr_db;
  std::vector<PhaseProfile> sensor_phase_offsets;  // empty, or one per channel
  std::uint64_t seed = 1;

  void validate() const;
};

struct Scene {
  MultichannelWave mixture;
  MultichannelWave target_images;
  MultichannelWave noise_images;       // diffuse + interferer + sensor noise
  MultichannelWave interferer_images;  // zero when the scene has no interferer
};

// Point sources are delayed by exact frequency-domain phase ramps with 1/r
// attenuation (channel 0 keeps unit gain for the target); the diffuse field
// sums equal-power plane waves from seeded directions uniform on the sphere.
// Sensor phase offsets are applied to the mixture only.
Scene simulate_scene(const SceneSpec& spec);

// sin(2 pi f d / c) / (2 pi f d / c), 1 at zero argument.
double diffuse_coherence_analytic(double frequency, double spacing, double speed_of_sound = 343.0);

}  // namespace mcse
