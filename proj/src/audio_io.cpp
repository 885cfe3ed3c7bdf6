#include "mcse/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mcse/error.hpp"

namespace mcse {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<unsigned char>((v >> s) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

SampleEncoding parse_encoding(const std::string& name) {
  if (name == "pcm16") return SampleEncoding::kPcm16;
  if (name == "float32") return SampleEncoding::kFloat32;
  fail(ErrorCode::kInvalidArgument, "unknown encoding '" + name + "' (pcm16|float32)");
}

MultichannelWave read_wave(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = slurp(path);
  const std::string where = " in '" + path.string() + "'";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorCode::kFormat, "not a RIFF/WAVE file" + where);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) fail(ErrorCode::kFormat, "truncated fmt chunk" + where);
      format = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (avail < 26) fail(ErrorCode::kFormat, "truncated extensible fmt chunk" + where);
        format = get_u16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }

  if (channels == 0 || rate == 0) fail(ErrorCode::kFormat, "missing fmt chunk" + where);
  if (data == nullptr) fail(ErrorCode::kFormat, "missing data chunk" + where);
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    fail(ErrorCode::kFormat, "unsupported encoding (format " + std::to_string(format) + ", " +
                                 std::to_string(bits) + " bits)" + where);
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  MultichannelWave wave(channels, frames, static_cast<double>(rate));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (n * channels + c) * bytes_per_sample;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(get_u16(p)) / 32768.0;
      } else {
        float f;
        std::memcpy(&f, p, sizeof f);
        v = f;
      }
      wave.channel(c)[n] = v;
    }
  }
  wave.validate();
  return wave;
}

std::vector<std::filesystem::path> expand_channel_pattern(const std::string& pattern,
                                                          std::size_t channels,
                                                          std::size_t first) {
  const auto at = pattern.find("{n}");
  require(at != std::string::npos, ErrorCode::kInvalidArgument,
          "pattern '" + pattern + "' has no {n} placeholder");
  auto make = [&](std::size_t n) {
    std::string s = pattern;
    s.replace(at, 3, std::to_string(n));
    return std::filesystem::path(s);
  };
  std::vector<std::filesystem::path> files;
  if (channels > 0) {
    for (std::size_t n = first; n < first + channels; ++n) files.push_back(make(n));
  } else {
    for (std::size_t n = first; std::filesystem::exists(make(n)); ++n) files.push_back(make(n));
    require(!files.empty(), ErrorCode::kIo, "no files match pattern '" + pattern + "'");
  }
  return files;
}

InputDescriptor InputDescriptor::parse(const std::string& text, std::size_t channels) {
  InputDescriptor d;
  if (text.find("{n}") != std::string::npos) {
    d.files = expand_channel_pattern(text, channels);
    return d;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!item.empty()) d.files.emplace_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  require(!d.files.empty(), ErrorCode::kInvalidArgument, "empty input descriptor");
  return d;
}

MultichannelWave read_multichannel(const InputDescriptor& descriptor) {
  require(!descriptor.files.empty(), ErrorCode::kInvalidArgument, "empty input descriptor");
  if (descriptor.files.size() == 1) return read_wave(descriptor.files.front());

  std::vector<MultichannelWave> parts;
  parts.reserve(descriptor.files.size());
  for (const auto& f : descriptor.files) {
    parts.push_back(read_wave(f));
    const auto& w = parts.back();
    require(w.channels() == 1, ErrorCode::kFormat,
            "'" + f.string() + "' must be mono in a per-channel file set");
    require(w.sample_rate() == parts.front().sample_rate(), ErrorCode::kFormat,
            "sample-rate mismatch: '" + f.string() + "'");
    require(w.length() == parts.front().length(), ErrorCode::kFormat,
            "length mismatch: '" + f.string() + "' has " + std::to_string(w.length()) +
                " samples, expected " + std::to_string(parts.front().length()));
  }
  MultichannelWave wave(parts.size(), parts.front().length(), parts.front().sample_rate());
  for (std::size_t c = 0; c < parts.size(); ++c) {
    auto src = parts[c].channel(0);
    std::copy(src.begin(), src.end(), wave.channel(c).begin());
  }
  return wave;
}

void write_wave(const MultichannelWave& wave, const std::filesystem::path& path,
                SampleEncoding encoding) {
  wave.validate();
  const bool pcm16 = encoding == SampleEncoding::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::size_t channels = wave.channels();
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(wave.length() * channels * (bits / 8));

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, static_cast<std::uint16_t>(channels));
  const auto rate = static_cast<std::uint32_t>(std::lround(wave.sample_rate()));
  put_u32(out, rate);
  put_u32(out, rate * static_cast<std::uint32_t>(channels) * (bits / 8));
  put_u16(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);

  for (std::size_t n = 0; n < wave.length(); ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = wave.channel(c)[n];
      if (pcm16) {
        if (std::abs(v) > 1.0) {
          fail(ErrorCode::kInvalidArgument,
               "sample " + std::to_string(v) + " clips in pcm16 (channel " + std::to_string(c) +
                   ", index " + std::to_string(n) + ")");
        }
        const long q = std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        const float f = static_cast<float>(v);
        unsigned char b[4];
        std::memcpy(b, &f, 4);
        out.insert(out.end(), b, b + 4);
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace mcse
