#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcse/wave.hpp"

namespace mcse {

enum class SampleEncoding { kPcm16, kFloat32 };

SampleEncoding parse_encoding(const std::string& name);

// Either one multichannel WAV file or an ordered list of mono files, one per
// channel. Channel order follows the list order.
struct InputDescriptor {
  std::vector<std::filesystem::path> files;

  // Accepts "a.wav", "a.CH1.wav,a.CH2.wav" or a pattern containing "{n}"
  // (e.g. "utt.CH{n}.wav"). A pattern expands to channels 1..channels, or to
  // every consecutively numbered existing file when channels is 0.
  static InputDescriptor parse(const std::string& text, std::size_t channels = 0);
};

std::vector<std::filesystem::path> expand_channel_pattern(const std::string& pattern,
                                                          std::size_t channels,
                                                          std::size_t first = 1);

MultichannelWave read_wave(const std::filesystem::path& path);
MultichannelWave read_multichannel(const InputDescriptor& descriptor);

// Float32 round trips are exact for samples representable in float; PCM16
// quantizes with step 2^-15 and rejects samples outside [-1, 1].
void write_wave(const MultichannelWave& wave, const std::filesystem::path& path,
                SampleEncoding encoding);

}  // namespace mcse
