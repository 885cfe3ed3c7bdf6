#pragma once

#include <cstddef>
#include <vector>

#include "mcse/array.hpp"
#include "mcse/spectrogram.hpp"

namespace mcse {

struct BeamformerConfig {
  double noise_fraction = 0.2;     // share of lowest-energy frames used as noise
  double diagonal_loading = 1e-3;  // relative to the average eigenvalue
};

// Per-bin M x M Hermitian matrices over the usable channels.
struct NoiseCovariance {
  std::vector<std::size_t> channels;  // spectrogram channels forming the M dimensions
  std::vector<double> frequencies;    // Hz, one per bin
  std::vector<bool> frame_mask;       // frames treated as noise
  std::vector<cplx> matrices;         // (bin, row, col), row-major

  std::size_t size() const noexcept { return channels.size(); }
  std::size_t bins() const noexcept { return frequencies.size(); }
  cplx& at(std::size_t k, std::size_t r, std::size_t c) {
    return matrices[(k * size() + r) * size() + c];
  }
  const cplx& at(std::size_t k, std::size_t r, std::size_t c) const {
    return matrices[(k * size() + r) * size() + c];
  }
};

struct BeamformerWeights {
  std::vector<std::size_t> channels;
  std::vector<cplx> weights;  // (bin, channel)

  std::size_t size() const noexcept { return channels.size(); }
  std::size_t bins() const noexcept { return channels.empty() ? 0 : weights.size() / channels.size(); }
  const cplx* bin(std::size_t k) const { return weights.data() + k * size(); }
};

// Noise frames are those whose broadband energy over the usable channels lies
// in the lowest noise_fraction of the utterance (at least one frame). Each
// matrix receives loading delta * tr(R) / M on its diagonal.
NoiseCovariance estimate_noise_covariance(const Spectrogram& spec, const ChannelStatus& status,
                                          const BeamformerConfig& config = {});

// d_k(i) = exp(-j 2 pi f_k tau_i) over the given channels.
std::vector<cplx> steering_vector(const SourceLocation& location,
                                  const std::vector<std::size_t>& channels, double frequency);

// w_k = R_k^-1 d_k / (d_k^H R_k^-1 d_k)
BeamformerWeights mvdr_weights(const NoiseCovariance& cov, const SourceLocation& location);

// w_k = d_k / M
BeamformerWeights delay_and_sum_weights(const SourceLocation& location,
                                        const std::vector<std::size_t>& channels,
                                        const std::vector<double>& frequencies);

// Single-channel output Y(k, t) = w_k^H x(k, t).
Spectrogram apply_beamformer(const Spectrogram& spec, const BeamformerWeights& weights);

std::vector<double> bin_frequencies(const Spectrogram& spec);

}  // namespace mcse
