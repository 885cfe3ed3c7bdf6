#include "mcse/beamformer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numbers>
#include <numeric>

#include "mcse/error.hpp"
#include "mcse/simd/kernels.hpp"

namespace mcse {

std::vector<double> bin_frequencies(const Spectrogram& spec) {
  std::vector<double> f(spec.bins());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = spec.bin_frequency(k);
  return f;
}

NoiseCovariance estimate_noise_covariance(const Spectrogram& spec, const ChannelStatus& status,
                                          const BeamformerConfig& config) {
  require(status.channels() == spec.channels(), ErrorCode::kShapeMismatch,
          "status and spectrogram channel counts differ");
  require(spec.frames() >= 1, ErrorCode::kDegenerate, "utterance too short to select noise frames");
  require(config.noise_fraction > 0.0 && config.noise_fraction <= 1.0, ErrorCode::kInvalidArgument,
          "noise_fraction must be in (0, 1]");

  NoiseCovariance cov;
  cov.channels = status.usable();
  require(!cov.channels.empty(), ErrorCode::kNoUsableChannels, "no usable channels");
  cov.frequencies = bin_frequencies(spec);
  const std::size_t m = cov.size(), bins = spec.bins(), frames = spec.frames();
  const auto& kern = simd::kernels();

  std::vector<double> energy(frames, 0.0), power(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(power.begin(), power.end(), 0.0);
    for (std::size_t c : cov.channels) kern.power_accumulate(spec.frame(c, t).data(), power.data(), bins);
    energy[t] = std::accumulate(power.begin(), power.end(), 0.0);
  }
  std::vector<std::size_t> order(frames);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return energy[a] < energy[b]; });
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(config.noise_fraction * static_cast<double>(frames)));
  cov.frame_mask.assign(frames, false);
  for (std::size_t n = 0; n < count; ++n) cov.frame_mask[order[n]] = true;

  // Accumulate upper triangle as (row, col) planes over bins, then scatter.
  std::vector<std::vector<cplx>> planes(m * m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = r; c < m; ++c) planes[r * m + c].assign(bins, cplx{});
  }
  for (std::size_t t = 0; t < frames; ++t) {
    if (!cov.frame_mask[t]) continue;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = r; c < m; ++c) {
        kern.cross_accumulate(spec.frame(cov.channels[r], t).data(),
                              spec.frame(cov.channels[c], t).data(), planes[r * m + c].data(), bins);
      }
    }
  }

  cov.matrices.assign(bins * m * m, cplx{});
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t k = 0; k < bins; ++k) {
    double trace = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = r; c < m; ++c) {
        const cplx v = planes[r * m + c][k] * inv;
        if (r == c) {
          cov.at(k, r, r) = {v.real(), 0.0};
          trace += v.real();
        } else {
          cov.at(k, r, c) = v;
          cov.at(k, c, r) = std::conj(v);
        }
      }
    }
    // An all-zero bin has no scale to load against; use the identity.
    const double loading = trace > 0.0 ? config.diagonal_loading * trace / static_cast<double>(m) : 1.0;
    for (std::size_t r = 0; r < m; ++r) cov.at(k, r, r) += loading;
  }
  return cov;
}

std::vector<cplx> steering_vector(const SourceLocation& location,
                                  const std::vector<std::size_t>& channels, double frequency) {
  std::vector<cplx> d(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    require(channels[i] < location.delays.size(), ErrorCode::kShapeMismatch,
            "location lacks a delay for channel " + std::to_string(channels[i]));
    d[i] = std::polar(1.0, -2.0 * std::numbers::pi * frequency * location.delays[channels[i]]);
  }
  return d;
}

BeamformerWeights mvdr_weights(const NoiseCovariance& cov, const SourceLocation& location) {
  using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
  const std::size_t m = cov.size();
  require(m >= 1, ErrorCode::kNoUsableChannels, "covariance has no channels");

  BeamformerWeights w{cov.channels, std::vector<cplx>(cov.bins() * m)};
  const auto dim = static_cast<Eigen::Index>(m);
  for (std::size_t k = 0; k < cov.bins(); ++k) {
    const std::vector<cplx> dv = steering_vector(location, cov.channels, cov.frequencies[k]);
    const Eigen::Map<const Vector> d(dv.data(), dim);
    const Eigen::Map<const Matrix> r(&cov.matrices[k * m * m], dim, dim);
    const Eigen::LLT<Matrix> llt(r);
    require(llt.info() == Eigen::Success, ErrorCode::kNumerical,
            "noise covariance not positive definite at bin " + std::to_string(k));
    const Vector z = llt.solve(d);
    const cplx norm = d.dot(z);  // d^H R^-1 d
    require(std::abs(norm) > 0.0 && std::isfinite(norm.real()), ErrorCode::kNumerical,
            "degenerate MVDR normalization at bin " + std::to_string(k));
    for (std::size_t i = 0; i < m; ++i) w.weights[k * m + i] = z(static_cast<Eigen::Index>(i)) / norm;
  }
  return w;
}

BeamformerWeights delay_and_sum_weights(const SourceLocation& location,
                                        const std::vector<std::size_t>& channels,
                                        const std::vector<double>& frequencies) {
  const std::size_t m = channels.size();
  require(m >= 1, ErrorCode::kNoUsableChannels, "no channels for delay-and-sum");
  BeamformerWeights w{channels, std::vector<cplx>(frequencies.size() * m)};
  for (std::size_t k = 0; k < frequencies.size(); ++k) {
    const std::vector<cplx> d = steering_vector(location, channels, frequencies[k]);
    for (std::size_t i = 0; i < m; ++i) w.weights[k * m + i] = d[i] / static_cast<double>(m);
  }
  return w;
}

Spectrogram apply_beamformer(const Spectrogram& spec, const BeamformerWeights& weights) {
  const std::size_t m = weights.size(), bins = spec.bins();
  require(m >= 1 && weights.bins() == bins, ErrorCode::kShapeMismatch,
          "beamformer weights do not match the spectrogram");
  for (std::size_t c : weights.channels) {
    require(c < spec.channels(), ErrorCode::kShapeMismatch, "weight channel out of range");
  }
  // Channel-major copy of the weights so each channel is a contiguous bin run.
  std::vector<std::vector<cplx>> per_channel(m, std::vector<cplx>(bins));
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t i = 0; i < m; ++i) per_channel[i][k] = weights.weights[k * m + i];
  }
  Spectrogram out = spec.like(1);
  const auto& kern = simd::kernels();
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    cplx* y = out.frame(0, t).data();
    for (std::size_t i = 0; i < m; ++i) {
      // y += x * conj(w) == conj(w) * x
      kern.cross_accumulate(spec.frame(weights.channels[i], t).data(), per_channel[i].data(), y, bins);
    }
  }
  return out;
}

}  // namespace mcse
