#include "mcse/array.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/simd/kernels.hpp"

namespace mcse {

bool ArrayGeometry::is_pdm_excluded(std::size_t c) const {
  return std::find(pdm_excluded.begin(), pdm_excluded.end(), c) != pdm_excluded.end();
}

Vec3 ArrayGeometry::centroid() const {
  Vec3 sum;
  for (const auto& p : mic_positions) sum = sum + p;
  return mic_positions.empty() ? sum : sum * (1.0 / static_cast<double>(mic_positions.size()));
}

void ArrayGeometry::validate() const {
  require(mic_positions.size() >= 2, ErrorCode::kInvalidArgument,
          "array geometry needs at least 2 microphones");
  for (const auto& p : mic_positions) {
    require(std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z),
            ErrorCode::kInvalidArgument, "microphone positions must be finite");
  }
  require(speed_of_sound > 0.0 && std::isfinite(speed_of_sound), ErrorCode::kInvalidArgument,
          "speed_of_sound must be positive");
  for (std::size_t i = 0; i < mic_positions.size(); ++i) {
    for (std::size_t j = i + 1; j < mic_positions.size(); ++j) {
      require(distance(mic_positions[i], mic_positions[j]) > 0.0, ErrorCode::kInvalidArgument,
              "microphones " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    }
  }
  for (std::size_t c : pdm_excluded) {
    require(c < mic_positions.size(), ErrorCode::kInvalidArgument,
            "pdm_excluded channel " + std::to_string(c) + " out of range");
  }
}

ArrayGeometry ArrayGeometry::tablet() {
  ArrayGeometry g;
  g.mic_positions = {
      {-0.10, 0.095, 0.00}, {0.00, 0.095, -0.02}, {0.10, 0.095, 0.00},
      {-0.10, -0.095, 0.00}, {0.00, -0.095, 0.00}, {0.10, -0.095, 0.00},
  };
  g.speed_of_sound = 343.0;
  g.pdm_excluded = {1};
  return g;
}

std::vector<std::size_t> ChannelStatus::usable() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < failed.size(); ++c) {
    if (!failed[c]) out.push_back(c);
  }
  return out;
}

ChannelStatus ChannelStatus::all_ok(std::size_t channels) {
  return {std::vector<bool>(channels, false), std::vector<double>(channels, 0.0),
          std::vector<double>(channels, std::numeric_limits<double>::quiet_NaN())};
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ChannelStatus detect_failures(const MultichannelWave& wave, const ArrayGeometry& geometry,
                              const FailureDetectorConfig& config) {
  const std::size_t channels = wave.channels();
  require(channels >= 2, ErrorCode::kInvalidArgument, "failure detection needs >= 2 channels");
  require(geometry.channels() == channels, ErrorCode::kShapeMismatch,
          "wave has " + std::to_string(channels) + " channels, geometry " +
              std::to_string(geometry.channels()));

  ChannelStatus status = ChannelStatus::all_ok(channels);
  std::vector<double> energy(channels, 0.0), rms(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (double v : wave.channel(c)) energy[c] += v * v;
    rms[c] = std::sqrt(energy[c] / static_cast<double>(std::max<std::size_t>(1, wave.length())));
  }
  const double med = median(rms);
  for (std::size_t c = 0; c < channels; ++c) {
    double dev;
    if (rms[c] == med) {
      dev = 0.0;
    } else if (rms[c] == 0.0) {
      dev = -std::numeric_limits<double>::infinity();
    } else if (med == 0.0) {
      dev = std::numeric_limits<double>::infinity();
    } else {
      dev = 20.0 * std::log10(rms[c] / med);
    }
    status.rms_deviation_db[c] = dev;
    if (std::abs(dev) > config.rms_deviation_db) status.failed[c] = true;
  }

  std::vector<std::size_t> peers;
  for (std::size_t c = 0; c < channels; ++c) {
    if (!status.failed[c] && !geometry.is_pdm_excluded(c)) peers.push_back(c);
  }

  // Linear cross-correlation through zero-padded FFTs.
  const std::size_t max_lag = static_cast<std::size_t>(
      std::floor(config.max_lag_seconds * wave.sample_rate()));
  std::size_t nfft = wave.length() + max_lag + 1;
  nfft += nfft % 2;
  RealFft fft(nfft);
  std::vector<std::vector<cplx>> spectra(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    if (status.failed[c]) continue;
    spectra[c].resize(fft.bins());
    fft.forward(wave.channel(c), spectra[c]);
  }
  std::vector<cplx> cross(fft.bins());
  std::vector<double> corr(nfft);
  const auto& kern = simd::kernels();

  for (std::size_t c = 0; c < channels; ++c) {
    if (status.failed[c]) continue;
    double best = -1.0;
    bool evaluated = false;
    for (std::size_t p : peers) {
      if (p == c) continue;
      evaluated = true;
      double peak = 0.0;
      const double denom = std::sqrt(energy[c] * energy[p]);
      if (denom > 0.0) {
        std::fill(cross.begin(), cross.end(), cplx{});
        kern.cross_accumulate(spectra[c].data(), spectra[p].data(), cross.data(), cross.size());
        fft.inverse(cross, corr);
        // Circular lag l lives at index l (l >= 0) or nfft - l (l < 0).
        for (std::size_t l = 0; l <= max_lag; ++l) {
          peak = std::max(peak, std::abs(corr[l]));
          if (l > 0) peak = std::max(peak, std::abs(corr[nfft - l]));
        }
        peak /= denom;
      }
      best = std::max(best, peak);
    }
    if (evaluated) {
      status.max_correlation[c] = best;
      if (best < config.min_correlation) status.failed[c] = true;
    }
  }

  if (status.usable().empty()) fail(ErrorCode::kNoUsableChannels, "all channels flagged as failed");
  return status;
}

SourceLocation steering_delays(const ArrayGeometry& geometry, const Vec3& position) {
  require(!geometry.mic_positions.empty(), ErrorCode::kInvalidArgument, "empty geometry");
  SourceLocation loc{position, std::vector<double>(geometry.channels())};
  std::vector<double> dist(geometry.channels());
  for (std::size_t i = 0; i < geometry.channels(); ++i) {
    dist[i] = distance(position, geometry.mic_positions[i]);
    require(dist[i] > 1e-9, ErrorCode::kInvalidArgument,
            "source position coincides with microphone " + std::to_string(i));
  }
  for (std::size_t i = 0; i < geometry.channels(); ++i) {
    loc.delays[i] = (dist[i] - dist[0]) / geometry.speed_of_sound;
  }
  return loc;
}

Spectrogram align(const Spectrogram& spec, const SourceLocation& location) {
  require(location.delays.size() == spec.channels(), ErrorCode::kShapeMismatch,
          "location has " + std::to_string(location.delays.size()) + " delays for " +
              std::to_string(spec.channels()) + " channels");
  Spectrogram out = spec;
  std::vector<cplx> phasor(spec.bins());
  const auto& kern = simd::kernels();
  for (std::size_t c = 0; c < spec.channels(); ++c) {
    const double tau = location.delays[c];
    if (tau == 0.0) continue;
    for (std::size_t k = 0; k < spec.bins(); ++k) {
      phasor[k] = std::polar(1.0, 2.0 * std::numbers::pi * spec.bin_frequency(k) * tau);
    }
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      kern.complex_multiply(out.frame(c, t).data(), phasor.data(), spec.bins());
    }
  }
  return out;
}

}  // namespace mcse
