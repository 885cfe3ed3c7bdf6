#include "mcse/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"

namespace mcse {

StftWindows make_windows(const StftConfig& config) {
  const std::size_t len = config.window_length;
  StftWindows w{std::vector<double>(len), std::vector<double>(len)};
  for (std::size_t n = 0; n < len; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(len));
    const double v = config.window == WindowType::kSqrtHann ? std::sqrt(hann) : hann;
    w.analysis[n] = v;
    w.synthesis[n] = v;
  }
  return w;
}

double cola_deviation(const StftConfig& config) {
  const StftWindows w = make_windows(config);
  double lo = INFINITY, hi = 0.0;
  for (std::size_t n = 0; n < config.hop; ++n) {
    double sum = 0.0;
    for (std::size_t i = n; i < config.window_length; i += config.hop) {
      sum += w.analysis[i] * w.synthesis[i];
    }
    lo = std::min(lo, sum);
    hi = std::max(hi, sum);
  }
  return hi > 0.0 ? (hi - lo) / hi : INFINITY;
}

void validate(const StftConfig& config) {
  require(config.window_length >= 2, ErrorCode::kInvalidArgument, "window_length must be >= 2");
  require(config.hop >= 1 && config.hop <= config.window_length, ErrorCode::kInvalidArgument,
          "hop must be in [1, window_length]");
  require(config.fft_size >= config.window_length, ErrorCode::kInvalidArgument,
          "fft_size must be >= window_length");
  const double dev = cola_deviation(config);
  require(dev <= 1e-8, ErrorCode::kInvalidArgument,
          "window/hop pair is not constant-overlap-add (deviation " + std::to_string(dev) + ")");
}

std::size_t frame_count(std::size_t signal_length, const StftConfig& config) {
  if (config.center) return (signal_length + config.hop - 1) / config.hop;
  if (signal_length <= config.window_length) return 1;
  return (signal_length - config.window_length + config.hop - 1) / config.hop + 1;
}

namespace {

// Index of sample j of the reflect-padded signal (padding excludes the edge
// sample itself), or -1 if it falls outside.
long reflect_index(long j, long length) {
  if (j < 0) j = -j;
  if (j >= length) j = 2 * (length - 1) - j;
  return (j >= 0 && j < length) ? j : -1;
}

}  // namespace

Spectrogram stft_analyze(const MultichannelWave& wave, const StftConfig& config) {
  validate(config);
  const std::size_t len = wave.length();
  require(len >= config.window_length, ErrorCode::kInvalidArgument,
          "signal of " + std::to_string(len) + " samples is shorter than one window (" +
              std::to_string(config.window_length) + ")");

  const std::size_t frames = frame_count(len, config);
  const StftWindows w = make_windows(config);
  const long offset = config.center ? static_cast<long>(config.window_length / 2) : 0;
  Spectrogram spec(wave.channels(), frames, config, wave.sample_rate(), len);
  RealFft fft(config.fft_size);
  std::vector<double> buf(config.window_length);

  for (std::size_t c = 0; c < wave.channels(); ++c) {
    const auto x = wave.channel(c);
    for (std::size_t t = 0; t < frames; ++t) {
      const long start = static_cast<long>(t * config.hop) - offset;
      for (std::size_t n = 0; n < config.window_length; ++n) {
        const long j = start + static_cast<long>(n);
        double v = 0.0;
        if (config.center) {
          const long r = reflect_index(j, static_cast<long>(len));
          if (r >= 0) v = x[static_cast<std::size_t>(r)];
        } else if (j < static_cast<long>(len)) {
          v = x[static_cast<std::size_t>(j)];
        }
        buf[n] = v * w.analysis[n];
      }
      fft.forward(buf, spec.frame(c, t));
    }
  }
  return spec;
}

MultichannelWave stft_synthesize(const Spectrogram& spec) {
  const StftConfig& config = spec.config();
  validate(config);
  require(spec.bins() == config.bins(), ErrorCode::kShapeMismatch,
          "spectrogram bins inconsistent with fft_size");
  require(spec.frames() == frame_count(spec.signal_length(), config), ErrorCode::kShapeMismatch,
          "spectrogram frame count inconsistent with signal length");

  const std::size_t len = spec.signal_length();
  const StftWindows w = make_windows(config);
  const long offset = config.center ? static_cast<long>(config.window_length / 2) : 0;
  MultichannelWave out(spec.channels(), len, spec.sample_rate());

  std::vector<double> norm(len, 0.0);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const long start = static_cast<long>(t * config.hop) - offset;
    for (std::size_t n = 0; n < config.window_length; ++n) {
      const long j = start + static_cast<long>(n);
      if (j >= 0 && j < static_cast<long>(len)) {
        norm[static_cast<std::size_t>(j)] += w.analysis[n] * w.synthesis[n];
      }
    }
  }
  const double norm_max = *std::max_element(norm.begin(), norm.end());

  RealFft fft(config.fft_size);
  std::vector<double> buf(config.window_length);
  for (std::size_t c = 0; c < spec.channels(); ++c) {
    auto y = out.channel(c);
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      fft.inverse(spec.frame(c, t), buf);
      const long start = static_cast<long>(t * config.hop) - offset;
      for (std::size_t n = 0; n < config.window_length; ++n) {
        const long j = start + static_cast<long>(n);
        if (j >= 0 && j < static_cast<long>(len)) y[static_cast<std::size_t>(j)] += buf[n] * w.synthesis[n];
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      y[i] = norm[i] > 1e-10 * norm_max ? y[i] / norm[i] : 0.0;
    }
  }
  return out;
}

}  // namespace mcse
