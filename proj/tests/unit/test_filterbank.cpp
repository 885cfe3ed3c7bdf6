#include <doctest.h>

#include <numbers>

#include "mcse/error.hpp"
#include "mcse/filterbank.hpp"
#include "support.hpp"

using mcse::MultichannelWave;
using mcse::Spectrogram;
using mcse::StftConfig;

namespace {

double interior_relative_error(const MultichannelWave& a, const MultichannelWave& b, std::size_t edge) {
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    for (std::size_t n = edge; n + edge < a.length(); ++n) {
      const double d = a.channel(c)[n] - b.channel(c)[n];
      num += d * d;
      den += a.channel(c)[n] * a.channel(c)[n];
    }
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("default configuration") {
  const StftConfig cfg;
  CHECK(cfg.window_length == 1024);
  CHECK(cfg.hop == 256);
  CHECK(cfg.fft_size == 1024);
  CHECK(cfg.window == mcse::WindowType::kSqrtHann);
  CHECK(cfg.bins() == 513);
  CHECK(mcse::cola_deviation(cfg) < 1e-8);
  CHECK_NOTHROW(mcse::validate(cfg));
}

TEST_CASE("invalid configurations are rejected") {
  StftConfig cfg;
  cfg.hop = 300;  // sqrt-Hann at this hop is not COLA
  CHECK(mcse::cola_deviation(cfg) > 1e-8);
  CHECK_THROWS_AS(mcse::validate(cfg), mcse::Error);
  cfg = {};
  cfg.hop = 2048;
  CHECK_THROWS_AS(mcse::validate(cfg), mcse::Error);
  cfg = {};
  cfg.fft_size = 512;
  CHECK_THROWS_AS(mcse::validate(cfg), mcse::Error);
  cfg = {};
  cfg.window = mcse::WindowType::kHann;
  cfg.hop = 512;  // Hann-squared product at 50% overlap is not constant
  CHECK_THROWS_AS(mcse::validate(cfg), mcse::Error);
  CHECK_THROWS_AS(mcse::parse_window_type("kaiser"), mcse::Error);
}

TEST_CASE("frame count follows ceil(len / hop) when centred") {
  StftConfig cfg;
  CHECK(mcse::frame_count(16000, cfg) == 63);
  CHECK(mcse::frame_count(16128, cfg) == 63);
  CHECK(mcse::frame_count(16129, cfg) == 64);
  cfg.center = false;
  CHECK(mcse::frame_count(1024, cfg) == 1);
  CHECK(mcse::frame_count(1025, cfg) == 2);
  CHECK(mcse::frame_count(1024 + 256, cfg) == 2);
}

TEST_CASE("signal shorter than one window is an error") {
  CHECK_THROWS_AS(mcse::stft_analyze(MultichannelWave(1, 1000, 16000.0), StftConfig{}), mcse::Error);
}

TEST_CASE("perfect reconstruction of white noise") {
  for (auto window : {mcse::WindowType::kSqrtHann, mcse::WindowType::kHann}) {
    for (bool center : {true, false}) {
      StftConfig cfg;
      cfg.window = window;
      cfg.center = center;
      const MultichannelWave x = testing::random_wave(2, 20000, 16000.0, 3);
      const MultichannelWave y = mcse::stft_synthesize(mcse::stft_analyze(x, cfg));
      REQUIRE(y.length() == x.length());
      CHECK(interior_relative_error(x, y, cfg.window_length / 2) < 1e-6);
      if (center) {
        // Reflect padding makes the edges exact as well.
        CHECK(interior_relative_error(x, y, 0) < 1e-6);
      }
    }
  }
}

TEST_CASE("zero signal and zero spectrogram") {
  const MultichannelWave z(2, 3000, 16000.0);
  const Spectrogram s = mcse::stft_analyze(z, StftConfig{});
  for (const auto& v : s.data()) CHECK(v == testing::cplx{});
  const MultichannelWave y = mcse::stft_synthesize(s);
  CHECK(y == z);
}

TEST_CASE("linearity of analysis and synthesis") {
  const StftConfig cfg;
  const MultichannelWave x = testing::random_wave(1, 5000, 16000.0, 10);
  const MultichannelWave y = testing::random_wave(1, 5000, 16000.0, 11);
  MultichannelWave mix(1, 5000, 16000.0);
  const double a = 0.7, b = -1.3;
  for (std::size_t n = 0; n < 5000; ++n) mix.channel(0)[n] = a * x.channel(0)[n] + b * y.channel(0)[n];
  const Spectrogram sx = mcse::stft_analyze(x, cfg), sy = mcse::stft_analyze(y, cfg);
  const Spectrogram sm = mcse::stft_analyze(mix, cfg);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < sm.data().size(); ++i) {
    worst = std::max(worst, std::abs(sm.data()[i] - (a * sx.data()[i] + b * sy.data()[i])));
    scale = std::max(scale, std::abs(sm.data()[i]));
  }
  CHECK(worst <= 1e-12 * scale);

  Spectrogram scaled = sx;
  for (auto& v : scaled.data()) v *= 2.5;
  const MultichannelWave rx = mcse::stft_synthesize(sx), rs = mcse::stft_synthesize(scaled);
  for (std::size_t n = 0; n < 5000; ++n) {
    CHECK(std::abs(rs.channel(0)[n] - 2.5 * rx.channel(0)[n]) <= 1e-12);
  }
}

TEST_CASE("impulse gives a flat magnitude equal to the window value") {
  StftConfig cfg;
  cfg.center = false;
  const mcse::StftWindows w = mcse::make_windows(cfg);
  for (std::size_t n0 : {0u, 100u, 512u}) {
    MultichannelWave x(1, 4096, 16000.0);
    x.channel(0)[n0] = 1.0;
    const Spectrogram s = mcse::stft_analyze(x, cfg);
    for (std::size_t k = 0; k < s.bins(); ++k) {
      CHECK(std::abs(s.at(0, 0, k)) == doctest::Approx(w.analysis[n0]).epsilon(1e-12).scale(1.0));
    }
  }
  // Centred frames: frame 0 is centred on sample 0, where the taper peaks.
  MultichannelWave x(1, 4096, 16000.0);
  x.channel(0)[0] = 1.0;
  const Spectrogram s = mcse::stft_analyze(x, StftConfig{});
  for (std::size_t k = 0; k < s.bins(); ++k) CHECK(std::abs(s.at(0, 0, k)) == doctest::Approx(1.0));
}

TEST_CASE("bin-centred sinusoid concentrates at its bin") {
  for (auto window : {mcse::WindowType::kSqrtHann, mcse::WindowType::kHann}) {
    StftConfig cfg;
    cfg.window = window;
    const double fs = 16000.0;
    const std::size_t bin = 64;
    MultichannelWave x(1, 16000, fs);
    for (std::size_t n = 0; n < x.length(); ++n) {
      x.channel(0)[n] = std::sin(2.0 * std::numbers::pi * bin * fs / 1024.0 * n / fs);
    }
    const Spectrogram s = mcse::stft_analyze(x, cfg);
    for (std::size_t t = 4; t + 4 < s.frames(); ++t) {
      double total = 0.0, near = 0.0;
      std::size_t peak = 0;
      for (std::size_t k = 0; k < s.bins(); ++k) {
        const double e = std::norm(s.at(0, t, k));
        total += e;
        if (k + 1 >= bin && k <= bin + 1) near += e;
        if (e > std::norm(s.at(0, t, peak))) peak = k;
      }
      CHECK(peak == bin);
      // sqrt-Hann: the main lobe spans the bin and its two neighbours, which
      // hold 99.07% of the energy; Hann puts all of it there.
      CHECK(near / total >= 0.99);
    }
  }
}

TEST_CASE("per-frame Parseval consistency") {
  StftConfig cfg;
  cfg.center = false;
  const mcse::StftWindows w = mcse::make_windows(cfg);
  const MultichannelWave x = testing::random_wave(1, 8192, 16000.0, 21);
  const Spectrogram s = mcse::stft_analyze(x, cfg);
  const double n = static_cast<double>(cfg.fft_size);
  for (std::size_t t = 0; t < s.frames(); ++t) {
    double time = 0.0;
    for (std::size_t i = 0; i < cfg.window_length; ++i) {
      const std::size_t j = t * cfg.hop + i;
      if (j < x.length()) time += std::pow(x.channel(0)[j] * w.analysis[i], 2);
    }
    double freq = std::norm(s.at(0, t, 0)) + std::norm(s.at(0, t, s.bins() - 1));
    for (std::size_t k = 1; k + 1 < s.bins(); ++k) freq += 2.0 * std::norm(s.at(0, t, k));
    CHECK(freq / n == doctest::Approx(time).epsilon(1e-6));
  }
}

TEST_CASE("bin frequency mapping") {
  const Spectrogram s(1, 1, StftConfig{}, 16000.0, 256);
  CHECK(s.bin_frequency(0) == 0.0);
  CHECK(s.bin_frequency(64) == doctest::Approx(1000.0));
  CHECK(s.bin_frequency(512) == doctest::Approx(8000.0));
}
