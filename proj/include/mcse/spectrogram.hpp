#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcse/wave.hpp"

namespace mcse {

enum class WindowType {
  kSqrtHann,  // sqrt-Hann on both analysis and synthesis side
  kHann,      // Hann on both sides
};

WindowType parse_window_type(const std::string& name);
std::string to_string(WindowType type);

struct StftConfig {
  std::size_t window_length = 1024;
  std::size_t hop = 256;
  std::size_t fft_size = 1024;
  WindowType window = WindowType::kSqrtHann;
  // Reflect-pad half a window at both ends so frame t is centred on sample
  // t * hop. When false, frame t starts at sample t * hop.
  bool center = true;

  std::size_t bins() const noexcept { return fft_size / 2 + 1; }
  bool operator==(const StftConfig&) const = default;
};

// Complex subband coefficients laid out (channel, frame, bin), bins contiguous.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t channels, std::size_t frames, const StftConfig& config,
              double sample_rate, std::size_t signal_length);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t frames() const noexcept { return frames_; }
  std::size_t bins() const noexcept { return bins_; }
  const StftConfig& config() const noexcept { return config_; }
  double sample_rate() const noexcept { return sample_rate_; }
  // Length of the time signal this spectrogram was computed from.
  std::size_t signal_length() const noexcept { return signal_length_; }

  double bin_frequency(std::size_t k) const noexcept {
    return static_cast<double>(k) * sample_rate_ / static_cast<double>(config_.fft_size);
  }

  std::span<cplx> frame(std::size_t c, std::size_t t) {
    return {coeffs_.data() + (c * frames_ + t) * bins_, bins_};
  }
  std::span<const cplx> frame(std::size_t c, std::size_t t) const {
    return {coeffs_.data() + (c * frames_ + t) * bins_, bins_};
  }
  cplx& at(std::size_t c, std::size_t t, std::size_t k) {
    return coeffs_[(c * frames_ + t) * bins_ + k];
  }
  const cplx& at(std::size_t c, std::size_t t, std::size_t k) const {
    return coeffs_[(c * frames_ + t) * bins_ + k];
  }

  std::span<cplx> data() noexcept { return coeffs_; }
  std::span<const cplx> data() const noexcept { return coeffs_; }

  // Same geometry and metadata, different channel count, zero coefficients.
  Spectrogram like(std::size_t channels) const;
  // Copy of the listed channels, in the listed order.
  Spectrogram select_channels(std::span<const std::size_t> channels) const;

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  StftConfig config_;
  double sample_rate_ = 0.0;
  std::size_t signal_length_ = 0;
  std::vector<cplx> coeffs_;
};

}  // namespace mcse
