#pragma once

// JSON scene descriptions for the `simulate` command. Every field is
// optional and defaults to SceneSpec's value:
//
//   {
//     "sample_rate": 16000, "duration_s": 4.0, "seed": 1,
//     "geometry": {"mic_positions": [[x, y, z], ...], "speed_of_sound": 343,
//                  "pdm_excluded": [1]},
//     "target": {"signal": "speech_like", "position": [x, y, z]},
//     "target_rms": 0.05,
//     "diffuse_snr_db": 0.0,            (null: no diffuse noise)
//     "plane_waves": 128,
//     "interferer": {"signal": "white_noise", "position": [...], "snr_db": 0},
//     "sensor_noise_snr_db": null,
//     "sensor_phase_offsets": [0.0, 0.8, {"frequency_hz": [...], "radians": [...]}, ...]
//   }
//
// "signal" is speech_like, white_noise, silence, or {"wav": "path"} (channel 0
// of the file, resampling is not supported).

#include <filesystem>
#include <string>

#include "mcse/simulation.hpp"

namespace mcse {

SceneSpec scene_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
SceneSpec load_scene(const std::filesystem::path& path);

// Fully expanded description; sample-backed signals are written as "samples".
std::string scene_to_json(const SceneSpec& spec);

// Default target position: 0.4 m in front of the array centroid (+z), level
// with the microphones.
Vec3 default_target_position(const ArrayGeometry& geometry);

}  // namespace mcse
