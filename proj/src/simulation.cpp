#include "mcse/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mcse/error.hpp"
#include "mcse/fft.hpp"
#include "mcse/simd/kernels.hpp"

namespace mcse {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent stream per scene component.
std::uint64_t substream(std::uint64_t seed, std::uint64_t component) {
  return splitmix64(seed ^ splitmix64(component + 0x5EEDull));
}

double rms(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return x.empty() ? 0.0 : std::sqrt(e / static_cast<double>(x.size()));
}

void raised_cosine_envelope(std::span<double> seg, std::size_t ramp) {
  ramp = std::min(ramp, seg.size() / 2);
  for (std::size_t n = 0; n < ramp; ++n) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n) / static_cast<double>(ramp));
    seg[n] *= g;
    seg[seg.size() - 1 - n] *= g;
  }
}

std::vector<double> speech_like(std::size_t length, double fs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };

  std::vector<double> out(length, 0.0);
  std::size_t pos = static_cast<std::size_t>(range(0.05, 0.25) * fs);
  while (pos < length) {
    const std::size_t seg_len = std::min(length - pos, static_cast<std::size_t>(range(0.12, 0.35) * fs));
    std::vector<double> seg(seg_len, 0.0);
    if (uni(rng) < 0.75) {
      // Voiced: harmonics of a gliding f0 shaped by three formant resonances.
      const double f0a = range(100.0, 220.0), f0b = f0a * range(0.8, 1.2);
      const double formant[3] = {range(300.0, 800.0), range(900.0, 2200.0), range(2300.0, 3200.0)};
      const double width[3] = {90.0, 130.0, 200.0};
      const double weight[3] = {1.0, 0.6, 0.35};
      const double f0_mean = 0.5 * (f0a + f0b);
      const int harmonics = static_cast<int>(5000.0 / f0_mean);
      std::vector<double> amp(static_cast<std::size_t>(harmonics) + 1, 0.0), phase(amp.size());
      for (int h = 1; h <= harmonics; ++h) {
        const double f = h * f0_mean;
        double a = 0.02;
        for (int i = 0; i < 3; ++i) a += weight[i] / (1.0 + std::pow((f - formant[i]) / width[i], 2));
        amp[static_cast<std::size_t>(h)] = a;
        phase[static_cast<std::size_t>(h)] = range(0.0, kTwoPi);
      }
      double theta = 0.0;
      for (std::size_t n = 0; n < seg_len; ++n) {
        const double f0 = f0a + (f0b - f0a) * static_cast<double>(n) / static_cast<double>(seg_len);
        theta += kTwoPi * f0 / fs;
        double v = 0.0;
        for (int h = 1; h <= harmonics; ++h) {
          if (h * f0 >= 0.45 * fs) break;
          v += amp[static_cast<std::size_t>(h)] * std::sin(h * theta + phase[static_cast<std::size_t>(h)]);
        }
        seg[n] = v + 0.01 * gauss(rng);
      }
    } else {
      // Fricative: pre-emphasized noise, energy mostly above 2 kHz.
      double prev = 0.0, prev2 = 0.0;
      for (std::size_t n = 0; n < seg_len; ++n) {
        const double x = gauss(rng);
        seg[n] = 0.5 * (x - 1.6 * prev + 0.64 * prev2);
        prev2 = prev;
        prev = x;
      }
    }
    const double level = range(0.5, 1.0) / std::max(1e-12, rms(seg));
    raised_cosine_envelope(seg, static_cast<std::size_t>(0.02 * fs));
    for (std::size_t n = 0; n < seg_len; ++n) out[pos + n] += level * seg[n];
    pos += seg_len;
    const double gap = uni(rng) < 0.15 ? range(0.4, 0.8) : range(0.05, 0.3);
    pos += static_cast<std::size_t>(gap * fs);
  }
  const double r = rms(out);
  if (r > 0.0) {
    for (double& v : out) v /= r;
  }
  return out;
}

// Renders one point source at every microphone by frequency-domain delays.
MultichannelWave render_point_source(std::span<const double> signal, const Vec3& position,
                                     const ArrayGeometry& geometry, double fs,
                                     double reference_distance) {
  const std::size_t len = signal.size();
  std::vector<double> dist(geometry.channels());
  double max_delay = 0.0;
  for (std::size_t i = 0; i < geometry.channels(); ++i) {
    dist[i] = distance(position, geometry.mic_positions[i]);
    require(dist[i] > 1e-6, ErrorCode::kInvalidArgument, "source coincides with a microphone");
    max_delay = std::max(max_delay, dist[i] / geometry.speed_of_sound);
  }
  std::size_t nfft = len + static_cast<std::size_t>(std::ceil(max_delay * fs)) + 64;
  nfft += nfft % 2;
  RealFft fft(nfft);
  std::vector<cplx> spec(fft.bins()), shifted(fft.bins());
  fft.forward(signal, spec);
  std::vector<double> time(nfft);
  MultichannelWave out(geometry.channels(), len, fs);
  for (std::size_t i = 0; i < geometry.channels(); ++i) {
    const double tau = dist[i] / geometry.speed_of_sound;
    const double gain = reference_distance / dist[i];
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double omega = kTwoPi * static_cast<double>(k) * fs / static_cast<double>(nfft);
      shifted[k] = spec[k] * std::polar(gain, -omega * tau);
    }
    if (nfft % 2 == 0) shifted.back() = {shifted.back().real(), 0.0};
    fft.inverse(shifted, time);
    std::copy(time.begin(), time.begin() + static_cast<std::ptrdiff_t>(len), out.channel(i).begin());
  }
  return out;
}

// Sum of plane waves carrying independent white noise; each wave's spectrum
// is drawn directly in the frequency domain, so the field is periodic in the
// signal length and needs no edge handling.
MultichannelWave render_diffuse(const ArrayGeometry& geometry, std::size_t len, double fs,
                                std::size_t waves, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::size_t nfft = len + len % 2;
  RealFft fft(nfft);
  const std::size_t bins = fft.bins();
  const std::size_t channels = geometry.channels();
  std::vector<std::vector<cplx>> acc(channels, std::vector<cplx>(bins));
  std::vector<cplx> wave(bins), phasor(bins);
  const auto& kern = simd::kernels();
  const double bin_omega = kTwoPi * fs / static_cast<double>(nfft);

  for (std::size_t w = 0; w < waves; ++w) {
    const double z = 2.0 * uni(rng) - 1.0;
    const double az = kTwoPi * uni(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir{s * std::cos(az), s * std::sin(az), z};
    for (std::size_t k = 0; k < bins; ++k) wave[k] = {gauss(rng), gauss(rng)};
    wave[0] = {wave[0].real(), 0.0};
    if (nfft % 2 == 0) wave[bins - 1] = {wave[bins - 1].real(), 0.0};
    for (std::size_t i = 0; i < channels; ++i) {
      // A wave from direction `dir` reaches microphone p earlier by dir.p / c.
      const double advance = dir.dot(geometry.mic_positions[i]) / geometry.speed_of_sound;
      const cplx step = std::polar(1.0, bin_omega * advance);
      cplx ph{1.0, 0.0};
      for (std::size_t k = 0; k < bins; ++k) {
        if (k % 256 == 0) ph = std::polar(1.0, bin_omega * static_cast<double>(k) * advance);
        phasor[k] = ph;
        ph *= step;
      }
      if (nfft % 2 == 0) phasor[bins - 1] = {std::cos(bin_omega * static_cast<double>(bins - 1) * advance), 0.0};
      kern.multiply_accumulate(wave.data(), phasor.data(), acc[i].data(), bins);
    }
  }

  MultichannelWave out(channels, len, fs);
  std::vector<double> time(nfft);
  for (std::size_t i = 0; i < channels; ++i) {
    acc[i][0] = {acc[i][0].real(), 0.0};
    fft.inverse(acc[i], time);
    std::copy(time.begin(), time.begin() + static_cast<std::ptrdiff_t>(len), out.channel(i).begin());
  }
  return out;
}

void add_scaled(MultichannelWave& dst, const MultichannelWave& src, double gain) {
  for (std::size_t c = 0; c < dst.channels(); ++c) {
    auto d = dst.channel(c);
    auto s = src.channel(c);
    for (std::size_t n = 0; n < d.size(); ++n) d[n] += gain * s[n];
  }
}

void apply_phase_profile(std::span<double> x, const PhaseProfile& profile, double fs) {
  std::size_t nfft = x.size() + x.size() % 2;
  RealFft fft(nfft);
  std::vector<cplx> spec(fft.bins());
  fft.forward(x, spec);
  // DC and Nyquist of a real signal cannot carry a phase rotation.
  const std::size_t last = nfft % 2 == 0 ? spec.size() - 1 : spec.size();
  for (std::size_t k = 1; k < last; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
    spec[k] *= std::polar(1.0, profile.at(f));
  }
  std::vector<double> time(nfft);
  fft.inverse(spec, time);
  std::copy(time.begin(), time.begin() + static_cast<std::ptrdiff_t>(x.size()), x.begin());
}

}  // namespace

SignalKind parse_signal_kind(const std::string& name) {
  if (name == "speech_like") return SignalKind::kSpeechLike;
  if (name == "white_noise") return SignalKind::kWhiteNoise;
  if (name == "silence") return SignalKind::kSilence;
  fail(ErrorCode::kInvalidArgument, "unknown signal kind '" + name + "'");
}

std::string to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::kSpeechLike: return "speech_like";
    case SignalKind::kWhiteNoise: return "white_noise";
    case SignalKind::kSilence: return "silence";
  }
  return "unknown";
}

std::vector<double> generate_signal(SignalKind kind, std::size_t length, double sample_rate,
                                    std::uint64_t seed) {
  switch (kind) {
    case SignalKind::kSpeechLike:
      return speech_like(length, sample_rate, seed);
    case SignalKind::kWhiteNoise: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::vector<double> out(length);
      for (double& v : out) v = gauss(rng);
      return out;
    }
    case SignalKind::kSilence:
      return std::vector<double>(length, 0.0);
  }
  return {};
}

PhaseProfile PhaseProfile::constant(double radians) { return {{0.0}, {radians}}; }

double PhaseProfile::at(double frequency) const {
  if (radians.empty()) return 0.0;
  if (radians.size() == 1 || frequency <= frequency_hz.front()) return radians.front();
  if (frequency >= frequency_hz.back()) return radians.back();
  const auto it = std::upper_bound(frequency_hz.begin(), frequency_hz.end(), frequency);
  const std::size_t hi = static_cast<std::size_t>(it - frequency_hz.begin());
  const std::size_t lo = hi - 1;
  const double w = (frequency - frequency_hz[lo]) / (frequency_hz[hi] - frequency_hz[lo]);
  return radians[lo] + w * (radians[hi] - radians[lo]);
}

void SceneSpec::validate() const {
  geometry.validate();
  require(sample_rate > 0.0 && duration_seconds > 0.0, ErrorCode::kInvalidArgument,
          "sample rate and duration must be positive");
  require(target_rms > 0.0 && std::isfinite(target_rms), ErrorCode::kInvalidArgument,
          "target_rms must be positive");
  auto finite_opt = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
  require(finite_opt(diffuse_snr_db) && finite_opt(sensor_noise_snr_db) &&
              (!interferer || std::isfinite(interferer->snr_db)),
          ErrorCode::kInvalidArgument, "SNRs must be finite");
  require(!diffuse_snr_db || plane_waves >= 1, ErrorCode::kInvalidArgument,
          "diffuse field needs at least one plane wave");
  require(sensor_phase_offsets.empty() || sensor_phase_offsets.size() == geometry.channels(),
          ErrorCode::kInvalidArgument, "sensor_phase_offsets needs one profile per channel");
  for (const PhaseProfile& p : sensor_phase_offsets) {
    require(p.frequency_hz.size() == p.radians.size() && !p.radians.empty(),
            ErrorCode::kInvalidArgument, "phase profile knots and values must match");
    require(std::is_sorted(p.frequency_hz.begin(), p.frequency_hz.end()),
            ErrorCode::kInvalidArgument, "phase profile frequencies must be ascending");
  }
}

Scene simulate_scene(const SceneSpec& spec) {
  spec.validate();
  const double fs = spec.sample_rate;
  const auto len = static_cast<std::size_t>(std::lround(spec.duration_seconds * fs));
  require(len >= 1, ErrorCode::kInvalidArgument, "scene shorter than one sample");
  const std::size_t channels = spec.geometry.channels();

  auto source_signal = [&](const PointSource& src, std::uint64_t component) {
    if (!src.samples.empty()) {
      std::vector<double> s(src.samples);
      s.resize(len, 0.0);
      return s;
    }
    return generate_signal(src.kind, len, fs, substream(spec.seed, component));
  };

  Scene scene;
  const double target_ref = distance(spec.target.position, spec.geometry.mic_positions[0]);
  scene.target_images = render_point_source(source_signal(spec.target, 1), spec.target.position,
                                            spec.geometry, fs, target_ref);
  const double target_level = rms(scene.target_images.channel(0));
  if (target_level > 0.0) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (double& v : scene.target_images.channel(c)) v *= spec.target_rms / target_level;
    }
  }
  // Noise levels are set against the nominal target level so silent targets
  // still get the requested absolute noise.
  const double ref_power = spec.target_rms * spec.target_rms;

  scene.noise_images = MultichannelWave(channels, len, fs);
  scene.interferer_images = MultichannelWave(channels, len, fs);
  if (spec.interferer) {
    const double ref = distance(spec.interferer->position, spec.geometry.mic_positions[0]);
    MultichannelWave img = render_point_source(source_signal(*spec.interferer, 2),
                                               spec.interferer->position, spec.geometry, fs, ref);
    const double level = rms(img.channel(0));
    const double want = std::sqrt(ref_power * std::pow(10.0, -spec.interferer->snr_db / 10.0));
    add_scaled(scene.interferer_images, img, level > 0.0 ? want / level : 0.0);
    add_scaled(scene.noise_images, scene.interferer_images, 1.0);
  }
  if (spec.diffuse_snr_db) {
    MultichannelWave diffuse = render_diffuse(spec.geometry, len, fs, spec.plane_waves,
                                              substream(spec.seed, 3));
    const double level = rms(diffuse.channel(0));
    const double want = std::sqrt(ref_power * std::pow(10.0, -*spec.diffuse_snr_db / 10.0));
    add_scaled(scene.noise_images, diffuse, level > 0.0 ? want / level : 0.0);
  }
  if (spec.sensor_noise_snr_db) {
    std::mt19937_64 rng(substream(spec.seed, 4));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma = std::sqrt(ref_power * std::pow(10.0, -*spec.sensor_noise_snr_db / 10.0));
    for (std::size_t c = 0; c < channels; ++c) {
      for (double& v : scene.noise_images.channel(c)) v += sigma * gauss(rng);
    }
  }

  scene.mixture = scene.target_images;
  add_scaled(scene.mixture, scene.noise_images, 1.0);
  if (!spec.sensor_phase_offsets.empty()) {
    for (std::size_t c = 0; c < channels; ++c) {
      apply_phase_profile(scene.mixture.channel(c), spec.sensor_phase_offsets[c], fs);
    }
  }
  return scene;
}

double diffuse_coherence_analytic(double frequency, double spacing, double speed_of_sound) {
  require(spacing >= 0.0, ErrorCode::kInvalidArgument, "spacing must be non-negative");
  const double x = kTwoPi * frequency * spacing / speed_of_sound;
  return x == 0.0 ? 1.0 : std::sin(x) / x;
}

}  // namespace mcse
