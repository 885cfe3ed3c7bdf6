#include "mcse/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mcse/error.hpp"
#include "mcse/simd/kernels.hpp"

namespace mcse {

double Mask::mean() const {
  if (gains.empty()) return 0.0;
  return std::accumulate(gains.begin(), gains.end(), 0.0) / static_cast<double>(gains.size());
}

Mask Mask::filled(std::size_t frames, std::size_t bins, double value) {
  return {frames, bins, std::vector<double>(frames * bins, value)};
}

namespace {

void check_included(const Spectrogram& spec, std::span<const std::size_t> included) {
  require(included.size() >= 2, ErrorCode::kInvalidArgument,
          "at least 2 included channels are required");
  for (std::size_t c : included) {
    require(c < spec.channels(), ErrorCode::kInvalidArgument,
            "included channel " + std::to_string(c) + " out of range");
  }
}

// Frame range [lo, hi] of the Welch window centred on t.
std::pair<std::size_t, std::size_t> window_range(std::size_t t, std::size_t frames,
                                                 std::size_t halfwidth) {
  const std::size_t lo = t >= halfwidth ? t - halfwidth : 0;
  const std::size_t hi = std::min(frames - 1, t + halfwidth);
  return {lo, hi};
}

}  // namespace

CrossSpectra welch_cross_spectra(const Spectrogram& aligned, std::span<const std::size_t> included,
                                 std::size_t halfwidth) {
  check_included(aligned, included);
  const std::size_t frames = aligned.frames(), bins = aligned.bins();
  const auto& kern = simd::kernels();

  CrossSpectra cs;
  cs.channels.assign(included.begin(), included.end());
  cs.frames = frames;
  cs.bins = bins;
  for (std::size_t a = 0; a < cs.channels.size(); ++a) {
    for (std::size_t b = a + 1; b < cs.channels.size(); ++b) cs.pairs.emplace_back(a, b);
  }
  cs.cross.assign(cs.pairs.size() * frames * bins, cplx{});
  cs.auto_.assign(cs.channels.size() * frames * bins, 0.0);

  std::vector<double> inv_count(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto [lo, hi] = window_range(t, frames, halfwidth);
    inv_count[t] = 1.0 / static_cast<double>(hi - lo + 1);
  }

  std::vector<double> power(frames * bins);
  for (std::size_t c = 0; c < cs.channels.size(); ++c) {
    std::fill(power.begin(), power.end(), 0.0);
    for (std::size_t u = 0; u < frames; ++u) {
      kern.power_accumulate(aligned.frame(cs.channels[c], u).data(), &power[u * bins], bins);
    }
    for (std::size_t t = 0; t < frames; ++t) {
      double* out = &cs.auto_[(c * frames + t) * bins];
      const auto [lo, hi] = window_range(t, frames, halfwidth);
      for (std::size_t u = lo; u <= hi; ++u) {
        const double* p = &power[u * bins];
        for (std::size_t k = 0; k < bins; ++k) out[k] += p[k];
      }
      for (std::size_t k = 0; k < bins; ++k) out[k] *= inv_count[t];
    }
  }

  std::vector<cplx> periodogram(frames * bins);
  for (std::size_t p = 0; p < cs.pairs.size(); ++p) {
    const std::size_t ci = cs.channels[cs.pairs[p].first];
    const std::size_t cj = cs.channels[cs.pairs[p].second];
    std::fill(periodogram.begin(), periodogram.end(), cplx{});
    for (std::size_t u = 0; u < frames; ++u) {
      kern.cross_accumulate(aligned.frame(ci, u).data(), aligned.frame(cj, u).data(),
                            &periodogram[u * bins], bins);
    }
    for (std::size_t t = 0; t < frames; ++t) {
      cplx* out = &cs.cross[(p * frames + t) * bins];
      const auto [lo, hi] = window_range(t, frames, halfwidth);
      for (std::size_t u = lo; u <= hi; ++u) kern.complex_accumulate(&periodogram[u * bins], out, bins);
      kern.scale(out, inv_count[t], bins);
    }
  }
  return cs;
}

Mask msc(const CrossSpectra& cs) {
  require(!cs.pairs.empty(), ErrorCode::kInvalidArgument, "cross spectra hold no pairs");
  Mask mask = Mask::filled(cs.frames, cs.bins, 0.0);
  const auto& kern = simd::kernels();
  for (std::size_t p = 0; p < cs.pairs.size(); ++p) {
    for (std::size_t t = 0; t < cs.frames; ++t) {
      kern.coherence_accumulate(cs.cross_at(p, t), cs.auto_at(cs.pairs[p].first, t),
                                cs.auto_at(cs.pairs[p].second, t), &mask.gains[t * cs.bins], cs.bins);
    }
  }
  const double inv = 1.0 / static_cast<double>(cs.pairs.size());
  for (double& g : mask.gains) g = std::clamp(g * inv, 0.0, 1.0);
  return mask;
}

std::vector<double> long_term_msc(const Spectrogram& spec, std::size_t i, std::size_t j) {
  require(i < spec.channels() && j < spec.channels(), ErrorCode::kInvalidArgument,
          "channel index out of range");
  const std::size_t bins = spec.bins();
  const auto& kern = simd::kernels();
  std::vector<cplx> sxy(bins);
  std::vector<double> sxx(bins), syy(bins), out(bins, 0.0);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    kern.cross_accumulate(spec.frame(i, t).data(), spec.frame(j, t).data(), sxy.data(), bins);
    kern.power_accumulate(spec.frame(i, t).data(), sxx.data(), bins);
    kern.power_accumulate(spec.frame(j, t).data(), syy.data(), bins);
  }
  kern.coherence_accumulate(sxy.data(), sxx.data(), syy.data(), out.data(), bins);
  return out;
}

PdmField pdm(const Spectrogram& aligned, std::span<const std::size_t> included,
             std::span<const CalibrationFilter> calibration) {
  check_included(aligned, included);
  const std::size_t frames = aligned.frames(), bins = aligned.bins();

  Spectrogram sub = aligned.select_channels(included);
  if (!calibration.empty()) {
    std::vector<CalibrationFilter> reduced;
    for (const CalibrationFilter& f : calibration) {
      require(f.channels == aligned.channels() && f.bins == bins, ErrorCode::kShapeMismatch,
              "calibration filter does not cover the spectrogram");
      CalibrationFilter r = CalibrationFilter::neutral(included.size(), bins, f.stage,
                                                       f.sample_rate, f.fft_size);
      for (std::size_t c = 0; c < included.size(); ++c) {
        for (std::size_t k = 0; k < bins; ++k) r.at(c, k) = f.at(included[c], k);
      }
      reduced.push_back(std::move(r));
    }
    sub = compensate(sub, reduced);
  }

  PdmField field{frames, bins, aligned.sample_rate(), std::vector<double>(frames * bins, 0.0)};
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < included.size(); ++a) {
    for (std::size_t b = a + 1; b < included.size(); ++b, ++pairs) {
      for (std::size_t t = 0; t < frames; ++t) {
        const cplx* xa = sub.frame(a, t).data();
        const cplx* xb = sub.frame(b, t).data();
        double* out = &field.values[t * bins];
        for (std::size_t k = 0; k < bins; ++k) {
          const double zr = xa[k].real() * xb[k].real() + xa[k].imag() * xb[k].imag();
          const double zi = xa[k].imag() * xb[k].real() - xa[k].real() * xb[k].imag();
          out[k] += std::abs(std::atan2(zi, zr));
        }
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(pairs);
  for (double& v : field.values) v = std::clamp(v * inv, 0.0, std::numbers::pi);
  return field;
}

double alpha_bias(double frequency, double sample_rate) {
  return 0.4 + 0.3 * frequency / sample_rate;
}

Mask pdm_mask(const PdmField& field, double sample_rate) {
  require(field.bins >= 2, ErrorCode::kInvalidArgument, "PDM field needs at least 2 bins");
  require(sample_rate > 0.0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  const double fft_size = 2.0 * static_cast<double>(field.bins - 1);
  Mask mask = Mask::filled(field.frames, field.bins, 0.0);
  std::vector<double> alpha(field.bins);
  for (std::size_t k = 0; k < field.bins; ++k) {
    alpha[k] = alpha_bias(static_cast<double>(k) * sample_rate / fft_size, sample_rate);
  }
  for (std::size_t t = 0; t < field.frames; ++t) {
    for (std::size_t k = 0; k < field.bins; ++k) {
      mask.at(t, k) = std::min(1.0, 1.0 - std::tanh(field.at(t, k) - alpha[k]));
    }
  }
  return mask;
}

Mask combine_masks(const Mask* msc_mask, const Mask* pdm_mask, double floor, std::size_t frames,
                   std::size_t bins) {
  require(floor >= 0.0 && floor < 1.0, ErrorCode::kInvalidArgument, "floor must be in [0, 1)");
  for (const Mask* m : {msc_mask, pdm_mask}) {
    if (m) {
      require(m->frames == frames && m->bins == bins, ErrorCode::kShapeMismatch,
              "mask shape does not match the beamformer output");
    }
  }
  Mask gain = Mask::filled(frames, bins, 1.0);
  for (std::size_t i = 0; i < gain.gains.size(); ++i) {
    const double a = msc_mask ? msc_mask->gains[i] : 1.0;
    const double b = pdm_mask ? pdm_mask->gains[i] : 1.0;
    gain.gains[i] = std::max(floor, a * b);
  }
  return gain;
}

Spectrogram apply_mask(const Spectrogram& spec, const Mask& mask) {
  require(mask.frames == spec.frames() && mask.bins == spec.bins(), ErrorCode::kShapeMismatch,
          "mask shape does not match the spectrogram");
  Spectrogram out = spec;
  const auto& kern = simd::kernels();
  for (std::size_t c = 0; c < out.channels(); ++c) {
    for (std::size_t t = 0; t < out.frames(); ++t) {
      kern.apply_gain(out.frame(c, t).data(), &mask.gains[t * mask.bins], mask.bins);
    }
  }
  return out;
}

Spectrogram combine_and_apply(const Spectrogram& beamformed, const Mask* msc_mask,
                              const Mask* pdm_mask, double floor) {
  return apply_mask(beamformed,
                    combine_masks(msc_mask, pdm_mask, floor, beamformed.frames(), beamformed.bins()));
}

}  // namespace mcse
