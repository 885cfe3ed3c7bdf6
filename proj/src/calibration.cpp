#include "mcse/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mcse/error.hpp"
#include "mcse/filterbank.hpp"
#include "mcse/simd/kernels.hpp"

namespace mcse {

namespace {

double canonical_phase(double phi) {
  // atan2 yields [-pi, pi]; fold -pi onto pi.
  return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CalibrationFilter CalibrationFilter::neutral(std::size_t channels, std::size_t bins,
                                             CalibrationStage stage, double sample_rate,
                                             std::size_t fft_size) {
  return {channels, bins, stage, sample_rate, fft_size, std::vector<double>(channels * bins, 0.0)};
}

CalibrationAccumulator CalibrationAccumulator::empty(std::size_t channels, std::size_t bins) {
  return {channels, bins, std::vector<cplx>(channels * bins), std::vector<double>(channels * bins, 0.0), 0};
}

void CalibrationAccumulator::merge(const CalibrationAccumulator& other) {
  require(other.channels == channels && other.bins == bins, ErrorCode::kShapeMismatch,
          "cannot merge accumulators of different shapes");
  for (std::size_t i = 0; i < numerator.size(); ++i) {
    numerator[i] += other.numerator[i];
    denominator[i] += other.denominator[i];
  }
  frames_used += other.frames_used;
}

Spectrogram das_reference(const Spectrogram& aligned, const ChannelStatus& status) {
  require(status.channels() == aligned.channels(), ErrorCode::kShapeMismatch,
          "status and spectrogram channel counts differ");
  const std::vector<std::size_t> usable = status.usable();
  require(!usable.empty(), ErrorCode::kNoUsableChannels, "no usable channels for the reference");
  Spectrogram ref = aligned.like(1);
  const auto& kern = simd::kernels();
  const double inv = 1.0 / static_cast<double>(usable.size());
  for (std::size_t t = 0; t < aligned.frames(); ++t) {
    cplx* r = ref.frame(0, t).data();
    for (std::size_t c : usable) kern.complex_accumulate(aligned.frame(c, t).data(), r, aligned.bins());
    kern.scale(r, inv, aligned.bins());
  }
  return ref;
}

void accumulate(CalibrationAccumulator& acc, const Spectrogram& aligned, const Spectrogram& reference,
                const std::vector<bool>& frame_select, std::span<const std::size_t> channels) {
  require(acc.channels == aligned.channels() && acc.bins == aligned.bins(), ErrorCode::kShapeMismatch,
          "accumulator does not match the spectrogram");
  require(reference.channels() >= 1 && reference.frames() == aligned.frames() &&
              reference.bins() == aligned.bins(),
          ErrorCode::kShapeMismatch, "reference does not match the spectrogram");
  require(frame_select.size() == aligned.frames(), ErrorCode::kShapeMismatch,
          "frame selection length differs from frame count");

  std::vector<std::size_t> all;
  if (channels.empty()) {
    all.resize(aligned.channels());
    std::iota(all.begin(), all.end(), 0);
    channels = all;
  }
  const auto& kern = simd::kernels();
  const std::size_t bins = aligned.bins();
  for (std::size_t t = 0; t < aligned.frames(); ++t) {
    if (!frame_select[t]) continue;
    ++acc.frames_used;
    const cplx* r = reference.frame(0, t).data();
    for (std::size_t c : channels) {
      const cplx* x = aligned.frame(c, t).data();
      // conj(X) R == R conj(X)
      kern.cross_accumulate(r, x, &acc.numerator[c * bins], bins);
      kern.power_accumulate(x, &acc.denominator[c * bins], bins);
    }
  }
}

CalibrationFilter finalize(const CalibrationAccumulator& acc, CalibrationStage stage,
                           double sample_rate, std::size_t fft_size) {
  require(acc.frames_used > 0, ErrorCode::kDegenerate, "empty calibration accumulator");
  const std::size_t bins = acc.bins;
  std::vector<bool> valid(acc.channels * bins, false);
  bool any = false;
  for (std::size_t c = 0; c < acc.channels; ++c) {
    const double* den = &acc.denominator[c * bins];
    const double peak = *std::max_element(den, den + bins);
    for (std::size_t k = 0; k < bins; ++k) {
      valid[c * bins + k] = peak > 0.0 && den[k] >= 1e-12 * peak && std::abs(acc.numerator[c * bins + k]) > 0.0;
      any = any || valid[c * bins + k];
    }
  }
  require(any, ErrorCode::kDegenerate, "calibration accumulator holds no energy");

  CalibrationFilter filter = CalibrationFilter::neutral(acc.channels, bins, stage, sample_rate, fft_size);
  for (std::size_t k = 0; k < bins; ++k) {
    std::size_t ref = acc.channels;
    for (std::size_t c = 0; c < acc.channels && ref == acc.channels; ++c) {
      if (valid[c * bins + k]) ref = c;
    }
    if (ref == acc.channels) continue;
    const cplx ref_num = acc.numerator[ref * bins + k];
    for (std::size_t c = 0; c < acc.channels; ++c) {
      if (!valid[c * bins + k]) continue;
      // arg(num / den) == arg(num) since den > 0
      const cplx rel = acc.numerator[c * bins + k] * std::conj(ref_num);
      filter.at(c, k) = c == ref ? 0.0 : canonical_phase(std::atan2(rel.imag(), rel.real()));
    }
  }
  return filter;
}

std::vector<double> snr_per_frame(const Spectrogram& spec) {
  require(spec.channels() >= 1, ErrorCode::kInvalidArgument, "empty spectrogram");
  require(spec.frames() >= 10, ErrorCode::kInvalidArgument,
          "SNR estimation needs at least 10 frames, got " + std::to_string(spec.frames()));
  constexpr double kFloor = 1e-12;
  const auto& kern = simd::kernels();
  std::vector<double> energy(spec.frames()), power(spec.bins());
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    std::fill(power.begin(), power.end(), 0.0);
    kern.power_accumulate(spec.frame(0, t).data(), power.data(), spec.bins());
    energy[t] = std::max(kFloor, std::accumulate(power.begin(), power.end(), 0.0));
  }
  std::vector<double> sorted = energy;
  std::sort(sorted.begin(), sorted.end());
  const double noise = std::max(kFloor, sorted[static_cast<std::size_t>(0.1 * static_cast<double>(sorted.size() - 1))]);
  std::vector<double> snr(energy.size());
  for (std::size_t t = 0; t < energy.size(); ++t) snr[t] = 10.0 * std::log10(energy[t] / noise);
  return snr;
}

std::vector<bool> select_above_median(const std::vector<double>& snr_db) {
  require(!snr_db.empty(), ErrorCode::kInvalidArgument, "no frames to select");
  const double med = median(snr_db);
  std::vector<bool> sel(snr_db.size());
  for (std::size_t t = 0; t < snr_db.size(); ++t) sel[t] = snr_db[t] > med;
  return sel;
}

Spectrogram compensate(const Spectrogram& spec, std::span<const CalibrationFilter> filters) {
  for (const CalibrationFilter& f : filters) {
    require(f.channels == spec.channels() && f.bins == spec.bins(), ErrorCode::kShapeMismatch,
            "calibration filter is " + std::to_string(f.channels) + "x" + std::to_string(f.bins) +
                ", spectrogram " + std::to_string(spec.channels()) + "x" + std::to_string(spec.bins()));
  }
  Spectrogram out = spec;
  if (filters.empty()) return out;
  const auto& kern = simd::kernels();
  std::vector<cplx> phasor(spec.bins());
  for (std::size_t c = 0; c < spec.channels(); ++c) {
    for (std::size_t k = 0; k < spec.bins(); ++k) {
      double phi = 0.0;
      for (const CalibrationFilter& f : filters) phi += f.at(c, k);
      phasor[k] = std::polar(1.0, phi);
    }
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      kern.complex_multiply(out.frame(c, t).data(), phasor.data(), spec.bins());
    }
  }
  return out;
}

OfflineCalibrator::OfflineCalibrator(CalibrationContext context)
    : context_(std::move(context)),
      grid_(SearchGrid::spherical(context_.geometry, context_.grid)),
      acc_(CalibrationAccumulator::empty(context_.geometry.channels(), context_.stft.bins())) {
  context_.geometry.validate();
  validate(context_.stft);
}

bool OfflineCalibrator::add(const MultichannelWave& utterance) {
  require(utterance.channels() == context_.geometry.channels(), ErrorCode::kShapeMismatch,
          "utterance channel count differs from the geometry");
  if (sample_rate_ == 0.0) sample_rate_ = utterance.sample_rate();
  require(utterance.sample_rate() == sample_rate_, ErrorCode::kFormat,
          "training utterances must share one sample rate");

  const Spectrogram spec = stft_analyze(utterance, context_.stft);
  const ChannelStatus status = detect_failures(utterance, context_.geometry, context_.failure);
  const std::vector<std::size_t> usable = status.usable();
  if (usable.size() < 2) return false;
  const LocalizerResult loc = srp_phat(spec, context_.geometry, grid_, status);
  const Spectrogram aligned = align(spec, loc.location);
  const Spectrogram ref = das_reference(aligned, status);
  accumulate(acc_, aligned, ref, select_above_median(snr_per_frame(ref)), usable);
  ++used_;
  return true;
}

CalibrationFilter OfflineCalibrator::finalize() const {
  require(used_ > 0, ErrorCode::kDegenerate, "no usable training utterances");
  return mcse::finalize(acc_, CalibrationStage::kOffline, sample_rate_, context_.stft.fft_size);
}

CalibrationFilter offline_calibrate(std::span<const MultichannelWave> utterances,
                                    const CalibrationContext& context) {
  require(!utterances.empty(), ErrorCode::kInvalidArgument, "offline calibration needs utterances");
  OfflineCalibrator cal(context);
  for (const MultichannelWave& u : utterances) cal.add(u);
  return cal.finalize();
}

CalibrationFilter online_calibrate_aligned(const Spectrogram& aligned, const ChannelStatus& status,
                                           const CalibrationFilter& stage1,
                                           std::vector<std::string>* warnings) {
  const Spectrogram corrected = compensate(aligned, std::span(&stage1, 1));
  const Spectrogram ref = das_reference(corrected, status);
  CalibrationAccumulator acc = CalibrationAccumulator::empty(aligned.channels(), aligned.bins());
  const std::vector<std::size_t> usable = status.usable();
  accumulate(acc, corrected, ref, std::vector<bool>(aligned.frames(), true), usable);
  try {
    return finalize(acc, CalibrationStage::kOnline, aligned.sample_rate(), aligned.config().fft_size);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerate) throw;
    if (warnings) warnings->push_back("online calibration: utterance carries no energy, using neutral filter");
    return CalibrationFilter::neutral(aligned.channels(), aligned.bins(), CalibrationStage::kOnline,
                                      aligned.sample_rate(), aligned.config().fft_size);
  }
}

CalibrationFilter online_calibrate(const MultichannelWave& utterance, const CalibrationFilter& stage1,
                                   const CalibrationContext& context,
                                   std::vector<std::string>* warnings) {
  require(utterance.channels() == context.geometry.channels(), ErrorCode::kShapeMismatch,
          "utterance channel count differs from the geometry");
  const Spectrogram spec = stft_analyze(utterance, context.stft);
  ChannelStatus status;
  try {
    status = detect_failures(utterance, context.geometry, context.failure);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoUsableChannels) throw;
    if (warnings) warnings->push_back("online calibration: no usable channels, using neutral filter");
    return CalibrationFilter::neutral(spec.channels(), spec.bins(), CalibrationStage::kOnline,
                                      spec.sample_rate(), context.stft.fft_size);
  }
  SourceLocation location;
  if (status.usable().size() >= 2) {
    location = srp_phat(spec, context.geometry, SearchGrid::spherical(context.geometry, context.grid),
                        status)
                   .location;
  } else {
    location.delays.assign(spec.channels(), 0.0);
  }
  return online_calibrate_aligned(align(spec, location), status, stage1, warnings);
}

}  // namespace mcse
