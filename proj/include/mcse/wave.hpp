#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mcse {

using cplx = std::complex<double>;

// Planar multichannel signal: every channel has the same length.
class MultichannelWave {
 public:
  MultichannelWave() = default;
  MultichannelWave(std::size_t channels, std::size_t length, double sample_rate);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t length() const noexcept { return length_; }
  double sample_rate() const noexcept { return sample_rate_; }
  bool empty() const noexcept { return channels_ == 0; }

  std::span<double> channel(std::size_t c);
  std::span<const double> channel(std::size_t c) const;

  // Throws if the wave breaks an invariant (rate, channel count, finiteness).
  void validate() const;

  MultichannelWave select_channel(std::size_t c) const;

  bool operator==(const MultichannelWave&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  double sample_rate_ = 0.0;
  std::vector<double> samples_;
};

}  // namespace mcse
