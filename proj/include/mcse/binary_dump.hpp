#pragma once

// Little-endian binary files: a header of int32 fields followed by a float32
// payload.
//   spectrogram: {channels, frames, bins, sample_rate, window_length, hop},
//                then (re, im) pairs in (channel, frame, bin) order
//   mask:        {frames, bins}, then gains in (frame, bin) order
//   calibration: {channels, bins, stage, sample_rate, fft_size}, then phases
//                in (channel, bin) order

#include <filesystem>
#include <string>
#include <vector>

#include "mcse/calibration.hpp"
#include "mcse/masking.hpp"
#include "mcse/spectrogram.hpp"

namespace mcse {

void write_spectrogram(const Spectrogram& spec, const std::filesystem::path& path);

struct SpectrogramDump {
  std::size_t channels = 0, frames = 0, bins = 0;
  double sample_rate = 0.0;
  std::size_t window_length = 0, hop = 0;
  std::vector<cplx> coeffs;
};
SpectrogramDump read_spectrogram(const std::filesystem::path& path);

void write_mask(const Mask& mask, const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);

void write_calibration(const CalibrationFilter& filter, const std::filesystem::path& path);
CalibrationFilter read_calibration(const std::filesystem::path& path);

struct MaskSummaryRow {
  std::string id;
  double msc = -1.0;  // negative: mask disabled
  double pdm = -1.0;
  double gain = 0.0;
};

// id,mean_msc,mean_pdm,mean_gain; disabled masks are left empty.
void write_mask_summary_csv(const std::vector<MaskSummaryRow>& rows, const std::filesystem::path& path);

}  // namespace mcse
