#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcse/array.hpp"
#include "mcse/localizer.hpp"
#include "mcse/spectrogram.hpp"
#include "mcse/wave.hpp"

namespace mcse {

enum class CalibrationStage { kOffline = 0, kOnline = 1 };

// Phase-only per-channel, per-bin correction. Applying it multiplies channel
// c, bin k by exp(+j phase(c, k)). Channel 0 is the phase reference.
struct CalibrationFilter {
  std::size_t channels = 0;
  std::size_t bins = 0;
  CalibrationStage stage = CalibrationStage::kOffline;
  double sample_rate = 0.0;
  std::size_t fft_size = 0;
  std::vector<double> phase;  // (channel, bin), radians in (-pi, pi]

  double& at(std::size_t c, std::size_t k) { return phase[c * bins + k]; }
  double at(std::size_t c, std::size_t k) const { return phase[c * bins + k]; }

  static CalibrationFilter neutral(std::size_t channels, std::size_t bins, CalibrationStage stage,
                                   double sample_rate, std::size_t fft_size);
};

// Least-squares statistics for H_i(k) = argmin sum_t |R - H_i X_i|^2.
struct CalibrationAccumulator {
  std::size_t channels = 0;
  std::size_t bins = 0;
  std::vector<cplx> numerator;      // sum conj(X_i) R
  std::vector<double> denominator;  // sum |X_i|^2
  std::size_t frames_used = 0;

  static CalibrationAccumulator empty(std::size_t channels, std::size_t bins);
  // Sum semantics: accumulators built on disjoint data can be merged.
  void merge(const CalibrationAccumulator& other);
};

// Settings the calibration stages share with the enhancement pipeline.
struct CalibrationContext {
  StftConfig stft;
  ArrayGeometry geometry;
  FailureDetectorConfig failure;
  GridConfig grid;
};

// Mean over usable channels of the aligned spectrogram (single channel).
Spectrogram das_reference(const Spectrogram& aligned, const ChannelStatus& status);

// Adds the selected frames of every listed channel (all channels if empty).
void accumulate(CalibrationAccumulator& acc, const Spectrogram& aligned, const Spectrogram& reference,
                const std::vector<bool>& frame_select, std::span<const std::size_t> channels = {});

// phase(c, k) = arg(H_c(k) conj(H_ref(k))) with ref channel 0 (or the lowest
// channel with data at that bin); bins whose denominator is below 1e-12 of
// the channel maximum stay neutral.
CalibrationFilter finalize(const CalibrationAccumulator& acc, CalibrationStage stage,
                           double sample_rate, std::size_t fft_size);

// 10 log10(E(t) / N) with N the 10th-percentile frame energy; energies are
// floored at 1e-12. Uses channel 0 of the spectrogram.
std::vector<double> snr_per_frame(const Spectrogram& spec);

// Frames whose SNR is strictly above the utterance median.
std::vector<bool> select_above_median(const std::vector<double>& snr_db);

// Multiplies channel c, bin k by exp(+j sum_f f.phase(c, k)).
Spectrogram compensate(const Spectrogram& spec, std::span<const CalibrationFilter> filters);

// First stage: pools frames above the median SNR over many utterances.
class OfflineCalibrator {
 public:
  explicit OfflineCalibrator(CalibrationContext context);

  // Returns false (and adds nothing) if fewer than two channels are usable.
  bool add(const MultichannelWave& utterance);
  const CalibrationAccumulator& accumulator() const noexcept { return acc_; }
  std::size_t utterances_used() const noexcept { return used_; }
  CalibrationFilter finalize() const;

 private:
  CalibrationContext context_;
  SearchGrid grid_;
  CalibrationAccumulator acc_;
  double sample_rate_ = 0.0;
  std::size_t used_ = 0;
};

CalibrationFilter offline_calibrate(std::span<const MultichannelWave> utterances,
                                    const CalibrationContext& context);

// Second stage on an already aligned utterance: applies stage1, then one
// accumulate/finalize pass over all frames. Falls back to a neutral filter
// (and appends a warning) when the utterance carries no energy.
CalibrationFilter online_calibrate_aligned(const Spectrogram& aligned, const ChannelStatus& status,
                                           const CalibrationFilter& stage1,
                                           std::vector<std::string>* warnings = nullptr);

CalibrationFilter online_calibrate(const MultichannelWave& utterance, const CalibrationFilter& stage1,
                                   const CalibrationContext& context,
                                   std::vector<std::string>* warnings = nullptr);

}  // namespace mcse
