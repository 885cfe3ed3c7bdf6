#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcse/array.hpp"
#include "mcse/audio_io.hpp"
#include "mcse/beamformer.hpp"
#include "mcse/calibration.hpp"
#include "mcse/localizer.hpp"
#include "mcse/masking.hpp"
#include "mcse/spectrogram.hpp"
#include "mcse/wave.hpp"

namespace mcse {

struct MaskConfig {
  bool msc = true;
  bool pdm = true;
  double floor = 0.05;
  std::size_t welch_halfwidth = 4;
};

struct CalibrationSettings {
  bool enabled = false;
  std::string stage1_path;  // empty: neutral first stage
  bool online = true;       // per-utterance second stage
  // Compensate the beamformer input too. Off keeps the beamformer on the
  // uncalibrated signals and uses the correction for the phase masker only.
  bool apply_to_beamformer = true;
};

struct DumpConfig {
  bool masks = false;
  bool spectrogram = false;
  bool scores = false;
};

struct EnhancementConfig {
  StftConfig stft;
  ArrayGeometry geometry = ArrayGeometry::tablet();
  FailureDetectorConfig failure;
  GridConfig grid;
  BeamformerConfig beamformer;
  MaskConfig masks;
  CalibrationSettings calibration;
  SampleEncoding output_encoding = SampleEncoding::kFloat32;
  DumpConfig dump;

  void validate() const;
  CalibrationContext calibration_context() const;
};

struct Diagnostics {
  std::vector<bool> failed;
  std::vector<double> rms_deviation_db;
  std::vector<double> max_correlation;
  std::size_t usable_channels = 0;
  std::optional<std::size_t> candidate;  // unset when localization was skipped
  Vec3 position;
  std::vector<double> delays;
  std::optional<double> mean_msc;
  std::optional<double> mean_pdm;
  double mean_gain = 1.0;
  bool stage1_applied = false;
  bool online_applied = false;
  std::vector<std::string> warnings;
};

struct EnhancementResult {
  MultichannelWave enhanced;  // single channel, input length
  Diagnostics diagnostics;
  std::optional<Mask> msc_mask;
  std::optional<Mask> pdm_mask;
  Mask gain;
  std::vector<double> localizer_scores;
  std::vector<CalibrationFilter> calibration;  // filters applied before the phase masker
};

// analyze -> detect failures -> localize -> align -> [calibrate] -> MVDR ->
// MSC / PDM masks -> combine and apply -> synthesize.
// `stage1` overrides calibration.stage1_path when calibration is enabled.
EnhancementResult enhance_utterance(const EnhancementConfig& config, const MultichannelWave& wave,
                                    const CalibrationFilter* stage1 = nullptr);

// JSON object with the fields listed under "diagnostics" in the README.
std::string diagnostics_json(const Diagnostics& diagnostics);

// Writes the dumps enabled in config.dump into dir, named after id:
// <id>.msc.mask / <id>.pdm.mask / <id>.gain.mask, <id>.stft.bin (input
// spectrogram), <id>.scores.csv.
void write_dumps(const EnhancementConfig& config, const std::string& id, const MultichannelWave& input,
                 const EnhancementResult& result, const std::filesystem::path& dir);

struct ManifestEntry {
  std::string id;
  std::string input;          // InputDescriptor text
  std::size_t channels = 0;   // for "{n}" patterns; 0 discovers files
};

// JSON array of {"id": ..., "input": ...} or {"id": ..., "inputs": [...]}.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct BatchOptions {
  std::filesystem::path out_dir;
  bool strict = false;  // stop at the first failing utterance
};

struct BatchReport {
  std::string json;  // report document, see README for the schema
  std::size_t processed = 0;
  std::size_t failed = 0;
  bool aborted = false;

  // 0 success, 1 hard error (strict abort), 2 partial failure.
  int exit_code() const;
};

// Writes <out_dir>/<id>.enh.wav per utterance (plus dumps when configured)
// and <out_dir>/report.json.
BatchReport run_batch(const EnhancementConfig& config, const std::vector<ManifestEntry>& manifest,
                      const BatchOptions& options, const CalibrationFilter* stage1 = nullptr);

}  // namespace mcse
