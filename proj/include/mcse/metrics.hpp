#pragma once

#include <span>
#include <vector>

#include "mcse/masking.hpp"
#include "mcse/wave.hpp"

namespace mcse {

struct MaskBandStat {
  double low_hz = 0.0;
  double high_hz = 0.0;
  double mean = 0.0;
};

struct MetricReport {
  double si_sdr = 0.0;                // dB, enhanced vs reference
  double segmental_snr = 0.0;         // dB
  double noisy_si_sdr = 0.0;          // dB, noisy vs reference
  double noisy_segmental_snr = 0.0;   // dB
  std::vector<MaskBandStat> mask_bands;
};

inline constexpr double kSiSdrCap = 60.0;

// 10 log10(|a s|^2 / |a s - e|^2), a the least-squares scale; capped at 60 dB.
double si_sdr(std::span<const double> estimate, std::span<const double> reference);

// Mean of per-frame SNRs over 32 ms frames, each clamped to [-10, 35] dB.
double segmental_snr(std::span<const double> estimate, std::span<const double> reference,
                     double sample_rate, double frame_seconds = 0.032);

// Channel 0 of each wave; lengths are trimmed to the shortest.
MetricReport evaluate(const MultichannelWave& enhanced, const MultichannelWave& reference,
                      const MultichannelWave& noisy);

// Mean gain per band over 0-1, 1-2, 2-4 kHz and 4 kHz-Nyquist (bands above
// Nyquist are dropped).
std::vector<MaskBandStat> mask_band_statistics(const Mask& mask, double sample_rate);

}  // namespace mcse
