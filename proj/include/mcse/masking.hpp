#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mcse/calibration.hpp"
#include "mcse/spectrogram.hpp"

namespace mcse {

// Real gains per (frame, bin).
struct Mask {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> gains;

  double& at(std::size_t t, std::size_t k) { return gains[t * bins + k]; }
  double at(std::size_t t, std::size_t k) const { return gains[t * bins + k]; }
  double mean() const;

  static Mask filled(std::size_t frames, std::size_t bins, double value);
};

// Mean absolute inter-channel phase difference per (frame, bin), in [0, pi].
struct PdmField {
  std::size_t frames = 0;
  std::size_t bins = 0;
  double sample_rate = 0.0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t k) const { return values[t * bins + k]; }
};

struct CrossSpectra {
  std::vector<std::size_t> channels;                       // included spectrogram channels
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // positions in `channels`, i < j
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<cplx> cross;   // (pair, frame, bin)
  std::vector<double> auto_; // (channel position, frame, bin)

  const cplx* cross_at(std::size_t p, std::size_t t) const { return &cross[(p * frames + t) * bins]; }
  const double* auto_at(std::size_t c, std::size_t t) const { return &auto_[(c * frames + t) * bins]; }
};

// Sliding Welch average over 2K+1 STFT frames centred on each frame; windows
// are truncated at the utterance edges and normalized by their actual size.
CrossSpectra welch_cross_spectra(const Spectrogram& aligned, std::span<const std::size_t> included,
                                 std::size_t halfwidth = 4);

// Pair-averaged magnitude-squared coherence; 0/0 bins count as 0.
Mask msc(const CrossSpectra& cross);

// Coherence of two channels per bin with every frame in one Welch average.
std::vector<double> long_term_msc(const Spectrogram& spec, std::size_t i, std::size_t j);

// Applies the calibration filters (phase only) to the included channels and
// averages |arg(X_i conj(X_j))| over their pairs.
PdmField pdm(const Spectrogram& aligned, std::span<const std::size_t> included,
             std::span<const CalibrationFilter> calibration = {});

// 0.4 + 0.3 f / fs
double alpha_bias(double frequency, double sample_rate);

// min(1, 1 - tanh(W_P - alpha(f)))
Mask pdm_mask(const PdmField& field, double sample_rate);

// max(floor, msc * pdm); an absent mask counts as all ones.
Mask combine_masks(const Mask* msc_mask, const Mask* pdm_mask, double floor, std::size_t frames,
                   std::size_t bins);

Spectrogram apply_mask(const Spectrogram& spec, const Mask& mask);

Spectrogram combine_and_apply(const Spectrogram& beamformed, const Mask* msc_mask,
                              const Mask* pdm_mask, double floor);

}  // namespace mcse
