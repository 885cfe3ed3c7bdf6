#include "mcse/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mcse/binary_dump.hpp"
#include "mcse/error.hpp"
#include "mcse/filterbank.hpp"

namespace mcse {

using Json = nlohmann::ordered_json;

void EnhancementConfig::validate() const {
  mcse::validate(stft);
  geometry.validate();
  for (std::size_t c : geometry.pdm_excluded) {
    require(c < geometry.channels(), ErrorCode::kInvalidArgument,
            "pdm_excluded channel " + std::to_string(c) + " out of range");
  }
  require(failure.rms_deviation_db > 0.0, ErrorCode::kInvalidArgument, "rms_deviation_db must be positive");
  require(failure.min_correlation >= 0.0 && failure.min_correlation <= 1.0, ErrorCode::kInvalidArgument,
          "min_correlation must be in [0, 1]");
  require(failure.max_lag_seconds >= 0.0, ErrorCode::kInvalidArgument, "max_lag_ms must be non-negative");
  require(grid.azimuth_step_deg > 0.0 && grid.elevation_step_deg > 0.0, ErrorCode::kInvalidArgument,
          "grid steps must be positive");
  require(grid.elevation_min_deg <= grid.elevation_max_deg && grid.elevation_min_deg >= -90.0 &&
              grid.elevation_max_deg <= 90.0,
          ErrorCode::kInvalidArgument, "elevation range must lie in [-90, 90]");
  require(grid.radius > 0.0, ErrorCode::kInvalidArgument, "grid radius must be positive");
  require(beamformer.noise_fraction > 0.0 && beamformer.noise_fraction <= 1.0, ErrorCode::kInvalidArgument,
          "noise_fraction must be in (0, 1]");
  require(beamformer.diagonal_loading >= 0.0, ErrorCode::kInvalidArgument,
          "diagonal_loading must be non-negative");
  require(masks.floor >= 0.0 && masks.floor < 1.0, ErrorCode::kInvalidArgument, "floor must be in [0, 1)");
}

CalibrationContext EnhancementConfig::calibration_context() const {
  return {stft, geometry, failure, grid};
}

namespace {

void check_stage1(const CalibrationFilter& f, const MultichannelWave& wave, const EnhancementConfig& config) {
  require(f.channels == wave.channels() && f.bins == config.stft.bins() &&
              f.fft_size == config.stft.fft_size,
          ErrorCode::kShapeMismatch, "calibration file does not match the array or STFT settings");
  require(std::abs(f.sample_rate - wave.sample_rate()) < 0.5, ErrorCode::kShapeMismatch,
          "calibration file sample rate differs from the input");
}

}  // namespace

EnhancementResult enhance_utterance(const EnhancementConfig& config, const MultichannelWave& wave,
                                    const CalibrationFilter* stage1) {
  config.validate();
  wave.validate();
  require(wave.channels() == config.geometry.channels(), ErrorCode::kShapeMismatch,
          "input has " + std::to_string(wave.channels()) + " channels, geometry has " +
              std::to_string(config.geometry.channels()));

  EnhancementResult result;
  Diagnostics& diag = result.diagnostics;

  const Spectrogram spec = stft_analyze(wave, config.stft);
  const ChannelStatus status = detect_failures(wave, config.geometry, config.failure);
  const std::vector<std::size_t> usable = status.usable();
  diag.failed = status.failed;
  diag.rms_deviation_db = status.rms_deviation_db;
  diag.max_correlation = status.max_correlation;
  diag.usable_channels = usable.size();
  for (std::size_t c = 0; c < status.channels(); ++c) {
    if (status.failed[c]) diag.warnings.push_back("channel " + std::to_string(c) + " flagged as failed");
  }

  SourceLocation location;
  if (usable.size() >= 2) {
    const SearchGrid grid = SearchGrid::spherical(config.geometry, config.grid);
    LocalizerResult loc = srp_phat(spec, config.geometry, grid, status);
    location = loc.location;
    diag.candidate = loc.candidate;
    diag.position = grid.candidates[loc.candidate];
    result.localizer_scores = std::move(loc.scores);
  } else {
    location.delays.assign(wave.channels(), 0.0);
    diag.warnings.push_back("fewer than 2 usable channels, localization skipped");
  }
  diag.delays = location.delays;

  const Spectrogram aligned = align(spec, location);

  if (config.calibration.enabled) {
    CalibrationFilter first;
    if (stage1) {
      first = *stage1;
      diag.stage1_applied = true;
    } else if (!config.calibration.stage1_path.empty()) {
      first = read_calibration(config.calibration.stage1_path);
      diag.stage1_applied = true;
    } else {
      first = CalibrationFilter::neutral(wave.channels(), spec.bins(), CalibrationStage::kOffline,
                                         wave.sample_rate(), config.stft.fft_size);
    }
    check_stage1(first, wave, config);
    result.calibration.push_back(first);
    if (config.calibration.online) {
      if (usable.size() >= 2) {
        result.calibration.push_back(online_calibrate_aligned(aligned, status, first, &diag.warnings));
        diag.online_applied = true;
      } else {
        diag.warnings.push_back("online calibration skipped: fewer than 2 usable channels");
      }
    }
  }

  const Spectrogram& bf_input_raw = spec;
  Spectrogram bf_input_comp;
  if (config.calibration.apply_to_beamformer && !result.calibration.empty()) {
    bf_input_comp = compensate(spec, result.calibration);
  }
  const Spectrogram& bf_input = bf_input_comp.channels() ? bf_input_comp : bf_input_raw;
  const NoiseCovariance cov = estimate_noise_covariance(bf_input, status, config.beamformer);
  const Spectrogram beamformed = apply_beamformer(bf_input, mvdr_weights(cov, location));

  if (config.masks.msc) {
    if (usable.size() >= 2) {
      result.msc_mask = msc(welch_cross_spectra(aligned, usable, config.masks.welch_halfwidth));
      diag.mean_msc = result.msc_mask->mean();
    } else {
      diag.warnings.push_back("MSC mask skipped: fewer than 2 usable channels");
    }
  }
  if (config.masks.pdm) {
    std::vector<std::size_t> included;
    for (std::size_t c : usable) {
      if (!config.geometry.is_pdm_excluded(c)) included.push_back(c);
    }
    if (included.size() >= 2) {
      result.pdm_mask = pdm_mask(pdm(aligned, included, result.calibration), wave.sample_rate());
      diag.mean_pdm = result.pdm_mask->mean();
    } else {
      diag.warnings.push_back("PDM mask skipped: fewer than 2 eligible channels");
    }
  }

  result.gain = combine_masks(result.msc_mask ? &*result.msc_mask : nullptr,
                              result.pdm_mask ? &*result.pdm_mask : nullptr, config.masks.floor,
                              beamformed.frames(), beamformed.bins());
  diag.mean_gain = result.gain.mean();
  result.enhanced = stft_synthesize(apply_mask(beamformed, result.gain));
  return result;
}

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string diagnostics_json(const Diagnostics& d) {
  Json channels = Json::array();
  for (std::size_t c = 0; c < d.failed.size(); ++c) {
    channels.push_back({{"index", c},
                        {"failed", static_cast<bool>(d.failed[c])},
                        {"rms_deviation_db", number_or_null(d.rms_deviation_db[c])},
                        {"max_correlation", number_or_null(d.max_correlation[c])}});
  }
  Json j;
  j["channels"] = channels;
  j["usable_channels"] = d.usable_channels;
  j["localization"] = {{"candidate", d.candidate ? Json(*d.candidate) : Json(nullptr)},
                       {"position_m", {d.position.x, d.position.y, d.position.z}},
                       {"delays_s", d.delays}};
  j["masks"] = {{"mean_msc", d.mean_msc ? Json(*d.mean_msc) : Json(nullptr)},
                {"mean_pdm", d.mean_pdm ? Json(*d.mean_pdm) : Json(nullptr)},
                {"mean_gain", d.mean_gain}};
  j["calibration"] = {{"stage1_applied", d.stage1_applied}, {"online_applied", d.online_applied}};
  j["warnings"] = d.warnings;
  return j.dump();
}

void write_dumps(const EnhancementConfig& config, const std::string& id, const MultichannelWave& input,
                 const EnhancementResult& result, const std::filesystem::path& dir) {
  if (config.dump.masks) {
    if (result.msc_mask) write_mask(*result.msc_mask, dir / (id + ".msc.mask"));
    if (result.pdm_mask) write_mask(*result.pdm_mask, dir / (id + ".pdm.mask"));
    write_mask(result.gain, dir / (id + ".gain.mask"));
  }
  if (config.dump.spectrogram) write_spectrogram(stft_analyze(input, config.stft), dir / (id + ".stft.bin"));
  if (config.dump.scores && !result.localizer_scores.empty()) {
    write_scores_csv(dir / (id + ".scores.csv"), SearchGrid::spherical(config.geometry, config.grid),
                     result.localizer_scores);
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open manifest '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kFormat, "manifest '" + path.string() + "': " + e.what());
  }
  require(doc.is_array(), ErrorCode::kFormat, "manifest must be a JSON array");

  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  for (const Json& item : doc) {
    require(item.is_object() && item.contains("id") && item["id"].is_string(), ErrorCode::kFormat,
            "manifest entries need a string \"id\"");
    ManifestEntry e;
    e.id = item["id"].get<std::string>();
    require(!e.id.empty() && e.id.find('/') == std::string::npos && e.id != "." && e.id != "..",
            ErrorCode::kFormat, "manifest id '" + e.id + "' is not a valid file stem");
    require(ids.insert(e.id).second, ErrorCode::kFormat, "duplicate manifest id '" + e.id + "'");
    if (item.contains("input")) {
      require(item["input"].is_string(), ErrorCode::kFormat, "\"input\" must be a string");
      e.input = item["input"].get<std::string>();
    } else if (item.contains("inputs")) {
      require(item["inputs"].is_array() && !item["inputs"].empty(), ErrorCode::kFormat,
              "\"inputs\" must be a non-empty array of paths");
      for (const Json& p : item["inputs"]) {
        require(p.is_string(), ErrorCode::kFormat, "\"inputs\" must hold strings");
        e.input += (e.input.empty() ? "" : ",") + p.get<std::string>();
      }
    } else {
      fail(ErrorCode::kFormat, "manifest entry '" + e.id + "' has no \"input\" or \"inputs\"");
    }
    if (item.contains("channels")) {
      require(item["channels"].is_number_unsigned(), ErrorCode::kFormat, "\"channels\" must be a count");
      e.channels = item["channels"].get<std::size_t>();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

int BatchReport::exit_code() const {
  if (aborted) return 1;
  return failed > 0 ? 2 : 0;
}

BatchReport run_batch(const EnhancementConfig& config, const std::vector<ManifestEntry>& manifest,
                      const BatchOptions& options, const CalibrationFilter* stage1) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  require(!ec && std::filesystem::is_directory(options.out_dir), ErrorCode::kIo,
          "cannot create output directory '" + options.out_dir.string() + "'");

  BatchReport report;
  Json items = Json::array();
  std::vector<MaskSummaryRow> summary;
  for (const ManifestEntry& entry : manifest) {
    Json item;
    item["id"] = entry.id;
    item["input"] = entry.input;
    try {
      const MultichannelWave wave = read_multichannel(InputDescriptor::parse(entry.input, entry.channels));
      const EnhancementResult result = enhance_utterance(config, wave, stage1);
      const std::filesystem::path out = options.out_dir / (entry.id + ".enh.wav");
      write_wave(result.enhanced, out, config.output_encoding);
      write_dumps(config, entry.id, wave, result, options.out_dir);
      const Diagnostics& d = result.diagnostics;
      summary.push_back({entry.id, d.mean_msc.value_or(-1.0), d.mean_pdm.value_or(-1.0), d.mean_gain});
      item["status"] = "ok";
      item["output"] = out.filename().string();
      item["diagnostics"] = Json::parse(diagnostics_json(d));
      ++report.processed;
    } catch (const std::exception& e) {
      const auto* err = dynamic_cast<const Error*>(&e);
      item["status"] = "error";
      item["error"] = {{"code", err ? to_string(err->code()) : "internal"}, {"message", e.what()}};
      ++report.failed;
      if (options.strict) report.aborted = true;
    }
    items.push_back(std::move(item));
    if (report.aborted) break;
  }
  if (config.dump.masks && !summary.empty()) {
    write_mask_summary_csv(summary, options.out_dir / "mask_summary.csv");
  }

  Json doc;
  doc["version"] = 1;
  doc["utterances"] = items;
  doc["summary"] = {{"total", manifest.size()},
                    {"processed", report.processed},
                    {"failed", report.failed},
                    {"aborted", report.aborted}};
  report.json = doc.dump(2) + "\n";
  std::ofstream out(options.out_dir / "report.json");
  out << report.json;
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write report.json");
  return report;
}

}  // namespace mcse
