#include "mcse/wave.hpp"

#include <cmath>
#include <string>

#include "mcse/error.hpp"
#include "mcse/spectrogram.hpp"

namespace mcse {

MultichannelWave::MultichannelWave(std::size_t channels, std::size_t length, double sample_rate)
    : channels_(channels), length_(length), sample_rate_(sample_rate),
      samples_(channels * length, 0.0) {}

std::span<double> MultichannelWave::channel(std::size_t c) {
  return {samples_.data() + c * length_, length_};
}

std::span<const double> MultichannelWave::channel(std::size_t c) const {
  return {samples_.data() + c * length_, length_};
}

void MultichannelWave::validate() const {
  require(channels_ >= 1, ErrorCode::kInvalidArgument, "wave has no channels");
  require(sample_rate_ > 0.0 && std::isfinite(sample_rate_), ErrorCode::kInvalidArgument,
          "sample rate must be positive");
  for (double v : samples_) {
    require(std::isfinite(v), ErrorCode::kInvalidArgument, "wave contains non-finite samples");
  }
}

MultichannelWave MultichannelWave::select_channel(std::size_t c) const {
  require(c < channels_, ErrorCode::kInvalidArgument, "channel index out of range");
  MultichannelWave out(1, length_, sample_rate_);
  auto src = channel(c);
  std::copy(src.begin(), src.end(), out.channel(0).begin());
  return out;
}

WindowType parse_window_type(const std::string& name) {
  if (name == "sqrt_hann") return WindowType::kSqrtHann;
  if (name == "hann") return WindowType::kHann;
  fail(ErrorCode::kInvalidArgument, "unknown window type '" + name + "'");
}

std::string to_string(WindowType type) {
  return type == WindowType::kHann ? "hann" : "sqrt_hann";
}

Spectrogram::Spectrogram(std::size_t channels, std::size_t frames, const StftConfig& config,
                         double sample_rate, std::size_t signal_length)
    : channels_(channels), frames_(frames), bins_(config.bins()), config_(config),
      sample_rate_(sample_rate), signal_length_(signal_length),
      coeffs_(channels * frames * config.bins()) {}

Spectrogram Spectrogram::like(std::size_t channels) const {
  return Spectrogram(channels, frames_, config_, sample_rate_, signal_length_);
}

Spectrogram Spectrogram::select_channels(std::span<const std::size_t> channels) const {
  Spectrogram out = like(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    require(channels[i] < channels_, ErrorCode::kInvalidArgument, "channel index out of range");
    for (std::size_t t = 0; t < frames_; ++t) {
      auto src = frame(channels[i], t);
      std::copy(src.begin(), src.end(), out.frame(i, t).begin());
    }
  }
  return out;
}

}  // namespace mcse
