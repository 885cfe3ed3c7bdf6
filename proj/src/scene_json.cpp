#include "mcse/scene_json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcse/audio_io.hpp"
#include "mcse/error.hpp"

namespace mcse {

using Json = nlohmann::ordered_json;

namespace {

Vec3 parse_vec3(const Json& j, const char* what) {
  require(j.is_array() && j.size() == 3, ErrorCode::kFormat, std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void parse_signal(const Json& j, PointSource& src, const std::filesystem::path& base_dir) {
  if (j.is_string()) {
    src.kind = parse_signal_kind(j.get<std::string>());
    return;
  }
  require(j.is_object() && j.contains("wav"), ErrorCode::kFormat,
          "\"signal\" must be a generator name or {\"wav\": path}");
  std::filesystem::path p = j["wav"].get<std::string>();
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  const MultichannelWave w = read_wave(p);
  const auto ch = w.channel(0);
  src.samples.assign(ch.begin(), ch.end());
}

PointSource parse_source(const Json& j, const std::filesystem::path& base_dir, const char* what) {
  require(j.is_object(), ErrorCode::kFormat, std::string(what) + " must be an object");
  PointSource src;
  if (j.contains("signal")) parse_signal(j["signal"], src, base_dir);
  if (j.contains("position")) src.position = parse_vec3(j["position"], "position");
  if (j.contains("snr_db")) src.snr_db = j["snr_db"].get<double>();
  return src;
}

std::optional<double> optional_number(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

Json vec3_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json source_json(const PointSource& s) {
  Json j;
  if (s.samples.empty()) {
    j["signal"] = to_string(s.kind);
  } else {
    j["signal"] = {{"samples", s.samples.size()}};
  }
  j["position"] = vec3_json(s.position);
  j["snr_db"] = s.snr_db;
  return j;
}

}  // namespace

Vec3 default_target_position(const ArrayGeometry& geometry) {
  return geometry.centroid() + Vec3{0.0, 0.0, 0.4};
}

SceneSpec scene_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  SceneSpec spec;
  try {
    const Json j = Json::parse(text);
    require(j.is_object(), ErrorCode::kFormat, "scene description must be a JSON object");
    static const char* const kKnown[] = {"sample_rate", "duration_s", "seed", "geometry", "target",
                                         "target_rms", "diffuse_snr_db", "plane_waves", "interferer",
                                         "sensor_noise_snr_db", "sensor_phase_offsets"};
    for (const auto& [key, value] : j.items()) {
      require(std::find(std::begin(kKnown), std::end(kKnown), key) != std::end(kKnown),
              ErrorCode::kFormat, "unknown scene key '" + key + "'");
    }
    if (j.contains("sample_rate")) spec.sample_rate = j["sample_rate"].get<double>();
    if (j.contains("duration_s")) spec.duration_seconds = j["duration_s"].get<double>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("geometry")) {
      const Json& g = j["geometry"];
      if (g.contains("mic_positions")) {
        spec.geometry.mic_positions.clear();
        for (const Json& p : g["mic_positions"]) spec.geometry.mic_positions.push_back(parse_vec3(p, "mic position"));
      }
      if (g.contains("speed_of_sound")) spec.geometry.speed_of_sound = g["speed_of_sound"].get<double>();
      if (g.contains("pdm_excluded")) spec.geometry.pdm_excluded = g["pdm_excluded"].get<std::vector<std::size_t>>();
    }
    spec.target.position = default_target_position(spec.geometry);
    if (j.contains("target")) {
      const Vec3 fallback = spec.target.position;
      spec.target = parse_source(j["target"], base_dir, "target");
      if (!j["target"].contains("position")) spec.target.position = fallback;
    }
    if (j.contains("target_rms")) spec.target_rms = j["target_rms"].get<double>();
    if (j.contains("diffuse_snr_db")) spec.diffuse_snr_db = optional_number(j["diffuse_snr_db"]);
    if (j.contains("plane_waves")) spec.plane_waves = j["plane_waves"].get<std::size_t>();
    if (j.contains("interferer") && !j["interferer"].is_null()) {
      spec.interferer = parse_source(j["interferer"], base_dir, "interferer");
      if (!j["interferer"].contains("signal")) spec.interferer->kind = SignalKind::kWhiteNoise;
    }
    if (j.contains("sensor_noise_snr_db")) spec.sensor_noise_snr_db = optional_number(j["sensor_noise_snr_db"]);
    if (j.contains("sensor_phase_offsets")) {
      for (const Json& p : j["sensor_phase_offsets"]) {
        if (p.is_number()) {
          spec.sensor_phase_offsets.push_back(PhaseProfile::constant(p.get<double>()));
        } else {
          spec.sensor_phase_offsets.push_back(
              {p.at("frequency_hz").get<std::vector<double>>(), p.at("radians").get<std::vector<double>>()});
        }
      }
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::kFormat, std::string("scene description: ") + e.what());
  }
  spec.validate();
  return spec;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open scene '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str(), path.parent_path());
}

std::string scene_to_json(const SceneSpec& spec) {
  Json j;
  j["sample_rate"] = spec.sample_rate;
  j["duration_s"] = spec.duration_seconds;
  j["seed"] = spec.seed;
  Json mics = Json::array();
  for (const Vec3& p : spec.geometry.mic_positions) mics.push_back(vec3_json(p));
  j["geometry"] = {{"mic_positions", mics},
                   {"speed_of_sound", spec.geometry.speed_of_sound},
                   {"pdm_excluded", spec.geometry.pdm_excluded}};
  Json target = source_json(spec.target);
  target.erase("snr_db");
  j["target"] = target;
  j["target_rms"] = spec.target_rms;
  j["diffuse_snr_db"] = spec.diffuse_snr_db ? Json(*spec.diffuse_snr_db) : Json(nullptr);
  j["plane_waves"] = spec.plane_waves;
  j["interferer"] = spec.interferer ? source_json(*spec.interferer) : Json(nullptr);
  j["sensor_noise_snr_db"] = spec.sensor_noise_snr_db ? Json(*spec.sensor_noise_snr_db) : Json(nullptr);
  Json offsets = Json::array();
  for (const PhaseProfile& p : spec.sensor_phase_offsets) {
    if (p.radians.size() == 1) {
      offsets.push_back(p.radians[0]);
    } else {
      offsets.push_back({{"frequency_hz", p.frequency_hz}, {"radians", p.radians}});
    }
  }
  j["sensor_phase_offsets"] = offsets;
  return j.dump(2) + "\n";
}

}  // namespace mcse
