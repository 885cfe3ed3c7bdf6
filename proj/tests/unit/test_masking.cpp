#include <doctest.h>

#include <numbers>

#include "mcse/error.hpp"
#include "mcse/masking.hpp"
#include "support.hpp"

using mcse::Mask;
using testing::cplx;

namespace {

const std::vector<std::size_t> kAll3{0, 1, 2};

// Direct evaluation of the pair-averaged Welch coherence at one (t, k).
double oracle_msc(const mcse::Spectrogram& s, const std::vector<std::size_t>& ch, std::size_t t,
                  std::size_t k, std::size_t half) {
  const std::size_t lo = t >= half ? t - half : 0;
  const std::size_t hi = std::min(s.frames() - 1, t + half);
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t a = 0; a < ch.size(); ++a) {
    for (std::size_t b = a + 1; b < ch.size(); ++b) {
      cplx sxy{};
      double sxx = 0.0, syy = 0.0;
      for (std::size_t u = lo; u <= hi; ++u) {
        sxy += s.at(ch[a], u, k) * std::conj(s.at(ch[b], u, k));
        sxx += std::norm(s.at(ch[a], u, k));
        syy += std::norm(s.at(ch[b], u, k));
      }
      sum += std::norm(sxy) / (sxx * syy);
      ++pairs;
    }
  }
  return sum / pairs;
}

}  // namespace

TEST_CASE("MSC matches a direct Welch evaluation including truncated edges") {
  const mcse::Spectrogram s = testing::random_spectrogram(4, 12, 3);
  const std::vector<std::size_t> ch{0, 2, 3};
  const Mask m = mcse::msc(mcse::welch_cross_spectra(s, ch));
  REQUIRE(m.frames == 12);
  REQUIRE(m.bins == s.bins());
  for (std::size_t t : {0u, 1u, 4u, 6u, 11u}) {
    for (std::size_t k = 0; k < s.bins(); k += 41) {
      CHECK(m.at(t, k) == doctest::Approx(oracle_msc(s, ch, t, k, 4)).epsilon(1e-10));
    }
  }
  const Mask m1 = mcse::msc(mcse::welch_cross_spectra(s, ch, 1));
  CHECK(m1.at(5, 100) == doctest::Approx(oracle_msc(s, ch, 5, 100, 1)).epsilon(1e-10));
}

TEST_CASE("MSC bounds and the coherent limit") {
  const mcse::Spectrogram s = testing::random_spectrogram(3, 30, 4);
  const Mask m = mcse::msc(mcse::welch_cross_spectra(s, kAll3));
  for (double g : m.gains) {
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
  }
  mcse::Spectrogram dup = s;
  for (std::size_t t = 0; t < s.frames(); ++t) {
    for (std::size_t c = 1; c < 3; ++c) {
      for (std::size_t k = 0; k < s.bins(); ++k) dup.at(c, t, k) = s.at(0, t, k) * cplx(0.3 * c, -1.0);
    }
  }
  const Mask one = mcse::msc(mcse::welch_cross_spectra(dup, kAll3));
  for (double g : one.gains) CHECK(g == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("silent bins give zero coherence") {
  const mcse::Spectrogram z(2, 5, mcse::StftConfig{}, 16000.0, 1280);
  const Mask m = mcse::msc(mcse::welch_cross_spectra(z, std::vector<std::size_t>{0, 1}));
  for (double g : m.gains) CHECK(g == 0.0);
}

TEST_CASE("independent noise sits at the 1/(2K+1) bias floor") {
  const mcse::Spectrogram s = testing::random_spectrogram(2, 400, 5);
  const Mask m = mcse::msc(mcse::welch_cross_spectra(s, std::vector<std::size_t>{0, 1}));
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 4; t + 4 < m.frames; ++t) {
    for (std::size_t k = 0; k < m.bins; ++k, ++n) sum += m.at(t, k);
  }
  CHECK(sum / static_cast<double>(n) == doctest::Approx(1.0 / 9.0).epsilon(0.03));
}

TEST_CASE("MSC ignores per-channel gains and common phase rotations") {
  const mcse::Spectrogram s = testing::random_spectrogram(3, 20, 6);
  mcse::Spectrogram g = s;
  const auto rot = testing::random_complex(s.bins(), 7);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < s.frames(); ++t) {
      for (std::size_t k = 0; k < s.bins(); ++k) {
        g.at(c, t, k) *= (1.0 + c) * rot[k] / std::abs(rot[k]);
      }
    }
  }
  const Mask a = mcse::msc(mcse::welch_cross_spectra(s, kAll3));
  const Mask b = mcse::msc(mcse::welch_cross_spectra(g, kAll3));
  for (std::size_t i = 0; i < a.gains.size(); ++i) CHECK(std::abs(a.gains[i] - b.gains[i]) < 1e-12);
}

TEST_CASE("long-term coherence") {
  const mcse::Spectrogram s = testing::random_spectrogram(2, 200, 8);
  const auto same = mcse::long_term_msc(s, 0, 0);
  for (double v : same) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const auto diff = mcse::long_term_msc(s, 0, 1);
  double mean = 0.0;
  for (double v : diff) mean += v;
  CHECK(mean / static_cast<double>(diff.size()) == doctest::Approx(1.0 / 200.0).epsilon(0.2));
}

TEST_CASE("PDM of identical channels is zero and the mask is one") {
  const mcse::Spectrogram s = testing::random_spectrogram(1, 6, 9);
  mcse::Spectrogram x(3, 6, s.config(), 16000.0, s.signal_length());
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < 6; ++t) {
      std::copy(s.frame(0, t).begin(), s.frame(0, t).end(), x.frame(c, t).begin());
    }
  }
  const mcse::PdmField f = mcse::pdm(x, kAll3);
  for (double v : f.values) CHECK(v == 0.0);
  const Mask m = mcse::pdm_mask(f, 16000.0);
  for (double g : m.gains) CHECK(g == 1.0);
}

TEST_CASE("PDM averages absolute pair phase differences") {
  mcse::Spectrogram x(3, 1, mcse::StftConfig{}, 16000.0, 256);
  for (std::size_t k = 0; k < x.bins(); ++k) {
    x.at(0, 0, k) = 2.0;
    x.at(1, 0, k) = std::polar(0.5, 0.3);
    x.at(2, 0, k) = std::polar(1.0, -0.9);
  }
  // Pairs: |0 - 0.3|, |0 + 0.9|, |0.3 + 0.9|.
  const mcse::PdmField f = mcse::pdm(x, kAll3);
  CHECK(f.at(0, 10) == doctest::Approx((0.3 + 0.9 + 1.2) / 3.0).epsilon(1e-12));

  // Calibration phases rotate channels before the comparison.
  mcse::CalibrationFilter cal =
      mcse::CalibrationFilter::neutral(3, x.bins(), mcse::CalibrationStage::kOffline, 16000.0, 1024);
  for (std::size_t k = 0; k < x.bins(); ++k) {
    cal.at(1, k) = -0.3;
    cal.at(2, k) = 0.9;
  }
  const mcse::PdmField g = mcse::pdm(x, kAll3, std::span(&cal, 1));
  CHECK(g.at(0, 10) < 1e-12);
  // Only the included rows of the filter are used.
  const std::vector<std::size_t> sub{0, 2};
  CHECK(mcse::pdm(x, sub, std::span(&cal, 1)).at(0, 7) < 1e-12);
}

TEST_CASE("PDM mask values") {
  CHECK(mcse::alpha_bias(0.0, 16000.0) == 0.4);
  CHECK(mcse::alpha_bias(8000.0, 16000.0) == doctest::Approx(0.55));
  mcse::PdmField f{1, 513, 16000.0, std::vector<double>(513, std::numbers::pi)};
  const Mask m = mcse::pdm_mask(f, 16000.0);
  CHECK(m.at(0, 0) == doctest::Approx(1.0 - std::tanh(std::numbers::pi - 0.4)));
  CHECK(m.at(0, 0) == doctest::Approx(0.0082777).epsilon(1e-4));
  // Monotone non-increasing in W_P at fixed frequency; unity below alpha.
  double prev = 2.0;
  for (int i = 0; i <= 40; ++i) {
    mcse::PdmField one{1, 513, 16000.0, std::vector<double>(513, std::numbers::pi * i / 40.0)};
    const double g = mcse::pdm_mask(one, 16000.0).at(0, 256);
    CHECK(g <= prev);
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
    if (std::numbers::pi * i / 40.0 <= mcse::alpha_bias(4000.0, 16000.0)) CHECK(g == 1.0);
    prev = g;
  }
}

TEST_CASE("combine and apply") {
  Mask a = Mask::filled(2, 3, 0.5);
  Mask b = Mask::filled(2, 3, 0.04);
  b.at(1, 2) = 1.0;
  const Mask g = mcse::combine_masks(&a, &b, 0.05, 2, 3);
  CHECK(g.at(0, 0) == 0.05);
  CHECK(g.at(1, 2) == 0.5);
  const Mask only = mcse::combine_masks(&a, nullptr, 0.05, 2, 3);
  CHECK(only.gains == a.gains);
  const Mask none = mcse::combine_masks(nullptr, nullptr, 0.05, 2, 3);
  CHECK(none.mean() == 1.0);
  CHECK_THROWS_AS(mcse::combine_masks(&a, nullptr, 1.0, 2, 3), mcse::Error);
  CHECK_THROWS_AS(mcse::combine_masks(&a, nullptr, 0.05, 3, 3), mcse::Error);

  const mcse::Spectrogram s = testing::random_spectrogram(1, 4, 10);
  Mask m = Mask::filled(4, s.bins(), 1.0);
  m.at(2, 7) = 0.25;
  const mcse::Spectrogram y = mcse::apply_mask(s, m);
  CHECK(y.at(0, 2, 7) == s.at(0, 2, 7) * 0.25);
  CHECK(y.at(0, 3, 7) == s.at(0, 3, 7));
  CHECK_THROWS_AS(mcse::apply_mask(s, Mask::filled(3, s.bins(), 1.0)), mcse::Error);
}

TEST_CASE("fewer than two included channels is an error") {
  const mcse::Spectrogram s = testing::random_spectrogram(2, 4, 11);
  const std::vector<std::size_t> one{0};
  const std::vector<std::size_t> bad{0, 5};
  CHECK_THROWS_AS(mcse::welch_cross_spectra(s, one), mcse::Error);
  CHECK_THROWS_AS(mcse::pdm(s, bad), mcse::Error);
}
