#pragma once

#include <vector>

#include "mcse/spectrogram.hpp"
#include "mcse/wave.hpp"

namespace mcse {

struct StftWindows {
  std::vector<double> analysis;
  std::vector<double> synthesis;
};

// Periodic tapers of length window_length.
StftWindows make_windows(const StftConfig& config);

// Relative peak-to-peak deviation of sum_m wa(n + m*hop) * ws(n + m*hop).
double cola_deviation(const StftConfig& config);

// Throws unless hop <= window_length <= fft_size and the window/hop pair is
// constant-overlap-add within 1e-8.
void validate(const StftConfig& config);

std::size_t frame_count(std::size_t signal_length, const StftConfig& config);

Spectrogram stft_analyze(const MultichannelWave& wave, const StftConfig& config);

// Weighted overlap-add; output has the analyzed signal's length.
MultichannelWave stft_synthesize(const Spectrogram& spec);

}  // namespace mcse
