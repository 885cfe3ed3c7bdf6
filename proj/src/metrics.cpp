#include "mcse/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mcse/error.hpp"

namespace mcse {

double si_sdr(std::span<const double> estimate, std::span<const double> reference) {
  const std::size_t n = std::min(estimate.size(), reference.size());
  double ss = 0.0, se = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss += reference[i] * reference[i];
    se += reference[i] * estimate[i];
  }
  require(ss > 0.0, ErrorCode::kInvalidArgument, "SI-SDR reference has zero energy");
  const double a = se / ss;
  double target = 0.0, err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = a * reference[i];
    const double e = estimate[i] - s;
    target += s * s;
    err += e * e;
  }
  if (err <= target * std::pow(10.0, -kSiSdrCap / 10.0)) return kSiSdrCap;
  if (target <= 0.0) return -kSiSdrCap;
  return std::max(-kSiSdrCap, 10.0 * std::log10(target / err));
}

double segmental_snr(std::span<const double> estimate, std::span<const double> reference,
                     double sample_rate, double frame_seconds) {
  const std::size_t n = std::min(estimate.size(), reference.size());
  const auto frame = static_cast<std::size_t>(std::lround(frame_seconds * sample_rate));
  require(frame >= 1, ErrorCode::kInvalidArgument, "segment length must be at least one sample");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + frame <= n; start += frame) {
    double s = 0.0, e = 0.0;
    for (std::size_t i = start; i < start + frame; ++i) {
      s += reference[i] * reference[i];
      const double d = reference[i] - estimate[i];
      e += d * d;
    }
    double snr;
    if (e == 0.0) {
      snr = s > 0.0 ? 35.0 : -10.0;
    } else if (s == 0.0) {
      snr = -10.0;
    } else {
      snr = 10.0 * std::log10(s / e);
    }
    sum += std::clamp(snr, -10.0, 35.0);
    ++count;
  }
  require(count > 0, ErrorCode::kInvalidArgument, "signal shorter than one segment");
  return sum / static_cast<double>(count);
}

MetricReport evaluate(const MultichannelWave& enhanced, const MultichannelWave& reference,
                      const MultichannelWave& noisy) {
  require(!enhanced.empty() && !reference.empty() && !noisy.empty(), ErrorCode::kInvalidArgument,
          "evaluation needs three non-empty waves");
  const double fs = reference.sample_rate();
  MetricReport r;
  r.si_sdr = si_sdr(enhanced.channel(0), reference.channel(0));
  r.segmental_snr = segmental_snr(enhanced.channel(0), reference.channel(0), fs);
  r.noisy_si_sdr = si_sdr(noisy.channel(0), reference.channel(0));
  r.noisy_segmental_snr = segmental_snr(noisy.channel(0), reference.channel(0), fs);
  return r;
}

std::vector<MaskBandStat> mask_band_statistics(const Mask& mask, double sample_rate) {
  require(mask.bins >= 2 && mask.gains.size() == mask.frames * mask.bins, ErrorCode::kShapeMismatch,
          "malformed mask");
  require(sample_rate > 0.0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  const double nyquist = sample_rate / 2.0;
  const double bin_hz = nyquist / static_cast<double>(mask.bins - 1);
  std::vector<MaskBandStat> bands;
  for (const auto& [lo, hi] : {std::pair{0.0, 1000.0}, {1000.0, 2000.0}, {2000.0, 4000.0}, {4000.0, nyquist}}) {
    if (lo >= nyquist || hi <= lo) continue;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < mask.bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const bool last = hi >= nyquist;
      if (f < lo || (last ? f > hi : f >= hi)) continue;
      for (std::size_t t = 0; t < mask.frames; ++t) sum += mask.at(t, k);
      n += mask.frames;
    }
    bands.push_back({lo, std::min(hi, nyquist), n ? sum / static_cast<double>(n) : 0.0});
  }
  return bands;
}

}  // namespace mcse
