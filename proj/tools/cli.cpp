#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mcse/binary_dump.hpp"
#include "mcse/config.hpp"
#include "mcse/error.hpp"
#include "mcse/metrics.hpp"
#include "mcse/pipeline.hpp"
#include "mcse/scene_json.hpp"
#include "mcse/simulation.hpp"

namespace mcse::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

EnhancementConfig load_config(const std::string& path) {
  if (path.empty()) return EnhancementConfig{};
  return config::load_enhancement_config(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

struct EnhanceArgs {
  std::string input, manifest, out, config, calib, dump_dir, report;
  std::size_t channels = 0;
  bool dump_masks = false;
  bool strict = false;
};

int enhance(const EnhanceArgs& a, std::ostream& out) {
  EnhancementConfig cfg = load_config(a.config);
  if (a.dump_masks) cfg.dump.masks = true;
  std::optional<CalibrationFilter> stage1;
  if (!a.calib.empty()) {
    stage1 = read_calibration(a.calib);
    cfg.calibration.enabled = true;
  }
  const CalibrationFilter* s1 = stage1 ? &*stage1 : nullptr;

  if (!a.manifest.empty()) {
    const BatchReport report = run_batch(cfg, read_manifest(a.manifest), {a.out, a.strict}, s1);
    out << "processed " << report.processed << ", failed " << report.failed
        << (report.aborted ? " (aborted)" : "") << "\n";
    return report.exit_code();
  }

  const MultichannelWave wave = read_multichannel(InputDescriptor::parse(a.input, a.channels));
  const EnhancementResult result = enhance_utterance(cfg, wave, s1);
  const fs::path out_path = a.out;
  write_wave(result.enhanced, out_path, cfg.output_encoding);
  const fs::path dump_dir = a.dump_dir.empty() ? out_path.parent_path() : fs::path(a.dump_dir);
  if (cfg.dump.masks || cfg.dump.spectrogram || cfg.dump.scores) {
    if (!dump_dir.empty()) fs::create_directories(dump_dir);
    write_dumps(cfg, out_path.stem().string(), wave, result, dump_dir.empty() ? fs::path(".") : dump_dir);
  }
  const std::string diag = Json::parse(diagnostics_json(result.diagnostics)).dump(2) + "\n";
  if (a.report.empty()) {
    out << diag;
  } else {
    write_text(a.report, diag);
  }
  return 0;
}

struct CalibrateArgs {
  std::string config, manifest, calib, out, input;
  std::vector<std::string> inputs;
  std::size_t channels = 0;
};

int calibrate_offline(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  const EnhancementConfig cfg = load_config(a.config);
  std::vector<std::string> inputs = a.inputs;
  std::vector<std::size_t> channels(inputs.size(), a.channels);
  if (!a.manifest.empty()) {
    for (const ManifestEntry& e : read_manifest(a.manifest)) {
      inputs.push_back(e.input);
      channels.push_back(e.channels);
    }
  }
  require(!inputs.empty(), ErrorCode::kInvalidArgument, "calibrate offline needs --input or --manifest");
  OfflineCalibrator cal(cfg.calibration_context());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!cal.add(read_multichannel(InputDescriptor::parse(inputs[i], channels[i])))) {
      err << "skipped '" << inputs[i] << "': fewer than 2 usable channels\n";
    }
  }
  write_calibration(cal.finalize(), a.out);
  out << "pooled " << cal.utterances_used() << " of " << inputs.size() << " utterances ("
      << cal.accumulator().frames_used << " frames)\n";
  return 0;
}

int calibrate_online(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  const EnhancementConfig cfg = load_config(a.config);
  const MultichannelWave wave = read_multichannel(InputDescriptor::parse(a.input, a.channels));
  const CalibrationFilter stage1 =
      a.calib.empty() ? CalibrationFilter::neutral(wave.channels(), cfg.stft.bins(), CalibrationStage::kOffline,
                                                   wave.sample_rate(), cfg.stft.fft_size)
                      : read_calibration(a.calib);
  std::vector<std::string> warnings;
  write_calibration(online_calibrate(wave, stage1, cfg.calibration_context(), &warnings), a.out);
  for (const std::string& w : warnings) err << "warning: " << w << "\n";
  out << "wrote " << a.out << "\n";
  return 0;
}

struct SimulateArgs {
  std::string scene, out, encoding = "float32";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration, diffuse_snr;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  SceneSpec spec;
  if (a.scene.empty()) {
    spec.target.position = default_target_position(spec.geometry);
  } else {
    spec = load_scene(a.scene);
  }
  if (a.seed) spec.seed = *a.seed;
  if (a.duration) spec.duration_seconds = *a.duration;
  if (a.diffuse_snr) spec.diffuse_snr_db = *a.diffuse_snr;
  const SampleEncoding enc = parse_encoding(a.encoding);
  const Scene scene = simulate_scene(spec);
  const fs::path dir = a.out;
  fs::create_directories(dir);
  write_wave(scene.mixture, dir / "mixture.wav", enc);
  write_wave(scene.target_images, dir / "target.wav", enc);
  write_wave(scene.noise_images, dir / "noise.wav", enc);
  if (spec.interferer) write_wave(scene.interferer_images, dir / "interferer.wav", enc);
  write_text(dir / "scene.json", scene_to_json(spec));
  out << "wrote " << scene.mixture.channels() << "-channel scene (" << scene.mixture.length()
      << " samples) to " << dir.string() << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string enhanced, reference, noisy, mask, out;
};

int evaluate_cmd(const EvaluateArgs& a, std::ostream& out) {
  const MultichannelWave enhanced = read_wave(a.enhanced);
  const MultichannelWave reference = read_wave(a.reference);
  const MultichannelWave noisy = read_wave(a.noisy);
  MetricReport r = evaluate(enhanced, reference, noisy);
  if (!a.mask.empty()) r.mask_bands = mask_band_statistics(read_mask(a.mask), reference.sample_rate());
  Json j;
  j["si_sdr_db"] = r.si_sdr;
  j["segmental_snr_db"] = r.segmental_snr;
  j["noisy_si_sdr_db"] = r.noisy_si_sdr;
  j["noisy_segmental_snr_db"] = r.noisy_segmental_snr;
  j["si_sdr_improvement_db"] = r.si_sdr - r.noisy_si_sdr;
  Json bands = Json::array();
  for (const MaskBandStat& b : r.mask_bands) {
    bands.push_back({{"low_hz", b.low_hz}, {"high_hz", b.high_hz}, {"mean", b.mean}});
  }
  j["mask_bands"] = bands;
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
  }
  return 0;
}

int config_init(const std::string& path, bool force, std::ostream& out) {
  const std::string text = config::emit(EnhancementConfig{});
  if (path.empty()) {
    out << text;
    return 0;
  }
  require(force || !fs::exists(path), ErrorCode::kIo, "'" + path + "' exists (use --force to overwrite)");
  write_text(path, text);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multichannel speech enhancement with coherence and phase-difference masking", "mcse"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  EnhanceArgs ea;
  auto* enh = app.add_subcommand("enhance", "Enhance one utterance or a manifest of utterances");
  auto* in_opt = enh->add_option("--input", ea.input, "Multichannel WAV, comma-separated mono files, or a {n} pattern");
  auto* man_opt = enh->add_option("--manifest", ea.manifest, "JSON manifest for batch mode");
  in_opt->excludes(man_opt);
  enh->add_option("--channels", ea.channels, "Channel count for {n} patterns (0: discover)");
  enh->add_option("--out", ea.out, "Output WAV (single) or output directory (batch)")->required();
  enh->add_option("--config", ea.config, "Configuration file");
  enh->add_option("--calib", ea.calib, "First-stage calibration file (enables calibration)");
  enh->add_flag("--dump-masks", ea.dump_masks, "Write mask matrices and a mask summary");
  enh->add_option("--dump-dir", ea.dump_dir, "Directory for dumps in single-utterance mode");
  enh->add_option("--report", ea.report, "Diagnostics JSON path in single-utterance mode (default stdout)");
  enh->add_flag("--strict", ea.strict, "Stop the batch at the first failing utterance");

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Estimate phase calibration filters");
  cal->require_subcommand(1);
  auto* off = cal->add_subcommand("offline", "Pool high-SNR frames of many utterances into one filter");
  off->add_option("--input", ca.inputs, "Training utterance (repeatable)");
  off->add_option("--manifest", ca.manifest, "JSON manifest of training utterances");
  off->add_option("--channels", ca.channels, "Channel count for {n} patterns");
  off->add_option("--config", ca.config, "Configuration file");
  off->add_option("--out", ca.out, "Calibration file to write")->required();
  auto* on = cal->add_subcommand("online", "Estimate the residual filter of one utterance");
  on->add_option("--input", ca.input, "Utterance")->required();
  on->add_option("--channels", ca.channels, "Channel count for {n} patterns");
  on->add_option("--calib", ca.calib, "First-stage calibration file (default neutral)");
  on->add_option("--config", ca.config, "Configuration file");
  on->add_option("--out", ca.out, "Calibration file to write")->required();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Render a synthetic multichannel scene");
  sim->add_option("--scene", sa.scene, "Scene description (JSON)");
  sim->add_option("--out", sa.out, "Output directory")->required();
  sim->add_option("--seed", sa.seed, "Override the scene seed");
  sim->add_option("--duration", sa.duration, "Override the duration in seconds");
  sim->add_option("--diffuse-snr", sa.diffuse_snr, "Override the diffuse-noise SNR in dB");
  sim->add_option("--encoding", sa.encoding, "pcm16 or float32")->capture_default_str();

  EvaluateArgs va;
  auto* ev = app.add_subcommand("evaluate", "Objective metrics against a clean reference");
  ev->add_option("--enhanced", va.enhanced, "Enhanced WAV")->required();
  ev->add_option("--reference", va.reference, "Clean reference WAV")->required();
  ev->add_option("--noisy", va.noisy, "Unprocessed WAV")->required();
  ev->add_option("--mask", va.mask, "Mask dump for per-band statistics");
  ev->add_option("--out", va.out, "Report path (default stdout)");

  std::string config_out;
  bool force = false;
  auto* cfg = app.add_subcommand("config", "Configuration utilities");
  cfg->require_subcommand(1);
  auto* init = cfg->add_subcommand("init", "Write the full default configuration");
  init->add_option("--out", config_out, "Destination (default stdout)");
  init->add_flag("--force", force, "Overwrite an existing file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (enh->parsed()) {
      require(!ea.input.empty() || !ea.manifest.empty(), ErrorCode::kInvalidArgument,
              "enhance needs --input or --manifest");
      return enhance(ea, out);
    }
    if (off->parsed()) return calibrate_offline(ca, out, err);
    if (on->parsed()) return calibrate_online(ca, out, err);
    if (sim->parsed()) return simulate(sa, out);
    if (ev->parsed()) return evaluate_cmd(va, out);
    if (init->parsed()) return config_init(config_out, force, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace mcse::cli
