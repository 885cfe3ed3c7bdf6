#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mcse/spectrogram.hpp"
#include "mcse/wave.hpp"

namespace mcse {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  bool operator==(const Vec3&) const = default;
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

struct ArrayGeometry {
  std::vector<Vec3> mic_positions;  // meters
  double speed_of_sound = 343.0;    // m/s
  // Channels left out of the phase-difference pair statistics regardless of
  // their failure status (0-based).
  std::vector<std::size_t> pdm_excluded;

  std::size_t channels() const noexcept { return mic_positions.size(); }
  bool is_pdm_excluded(std::size_t c) const;
  Vec3 centroid() const;
  void validate() const;

  // Six-microphone tablet frame (20 cm x 19 cm); the second microphone sits
  // 2 cm behind the front plane and faces away from the talker.
  static ArrayGeometry tablet();
};

struct FailureDetectorConfig {
  double rms_deviation_db = 20.0;
  double min_correlation = 0.3;
  double max_lag_seconds = 0.010;
};

struct ChannelStatus {
  std::vector<bool> failed;
  // Broadband RMS relative to the median channel RMS.
  std::vector<double> rms_deviation_db;
  // Largest normalized cross-correlation with any peer channel (NaN if the
  // correlation rule was not evaluated for the channel).
  std::vector<double> max_correlation;

  std::size_t channels() const noexcept { return failed.size(); }
  std::vector<std::size_t> usable() const;

  static ChannelStatus all_ok(std::size_t channels);
};

struct SourceLocation {
  Vec3 position;
  std::vector<double> delays;  // seconds, relative to channel 0
};

// Flags channel i when its RMS deviates from the median channel RMS by more
// than rms_deviation_db, or when its peak normalized cross-correlation
// (|lag| <= max_lag_seconds) with every peer channel stays below
// min_correlation. Peers are channels that passed the RMS rule and are not
// pdm_excluded. Throws kNoUsableChannels if every channel is flagged.
ChannelStatus detect_failures(const MultichannelWave& wave, const ArrayGeometry& geometry,
                              const FailureDetectorConfig& config = {});

// tau_i = (|p - m_i| - |p - m_0|) / c
SourceLocation steering_delays(const ArrayGeometry& geometry, const Vec3& position);

// Multiplies channel i, bin k by exp(+j 2 pi f_k tau_i).
Spectrogram align(const Spectrogram& spec, const SourceLocation& location);

}  // namespace mcse
