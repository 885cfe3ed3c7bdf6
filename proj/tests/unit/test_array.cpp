#include <doctest.h>

#include <numbers>

#include "mcse/array.hpp"
#include "mcse/error.hpp"
#include "mcse/filterbank.hpp"
#include "mcse/simulation.hpp"
#include "support.hpp"

using mcse::ArrayGeometry;
using mcse::MultichannelWave;
using mcse::Vec3;

namespace {

MultichannelWave speech_scene(std::uint64_t seed) {
  mcse::SceneSpec spec;
  spec.duration_seconds = 2.0;
  spec.target.position = {0.1, 0.05, 0.5};
  spec.diffuse_snr_db = 20.0;
  spec.seed = seed;
  return mcse::simulate_scene(spec).mixture;
}

}  // namespace

TEST_CASE("tablet geometry") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  REQUIRE(g.channels() == 6);
  CHECK(g.mic_positions[1] == Vec3{0.0, 0.095, -0.02});
  CHECK(distance(g.mic_positions[0], g.mic_positions[2]) == doctest::Approx(0.2));
  CHECK(distance(g.mic_positions[0], g.mic_positions[3]) == doctest::Approx(0.19));
  CHECK(g.speed_of_sound == 343.0);
  CHECK(g.is_pdm_excluded(1));
  CHECK_FALSE(g.is_pdm_excluded(0));
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("geometry validation") {
  ArrayGeometry g = ArrayGeometry::tablet();
  g.speed_of_sound = 0.0;
  CHECK_THROWS_AS(g.validate(), mcse::Error);
  g = ArrayGeometry::tablet();
  g.mic_positions.resize(1);
  g.pdm_excluded.clear();
  CHECK_THROWS_AS(g.validate(), mcse::Error);
  g = ArrayGeometry::tablet();
  g.mic_positions[3] = g.mic_positions[0];
  CHECK_THROWS_AS(g.validate(), mcse::Error);
}

TEST_CASE("steering delays") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  // Equidistant from channels 0 and 2 (mirror plane x = 0).
  const auto loc = mcse::steering_delays(g, {0.0, 0.3, 0.5});
  REQUIRE(loc.delays.size() == 6);
  CHECK(loc.delays[0] == 0.0);
  CHECK(loc.delays[2] == doctest::Approx(0.0).epsilon(1e-15));
  // Far along +x: channel 2 is 0.2 m closer than channel 0.
  const auto far = mcse::steering_delays(g, {1000.0, 0.095, 0.0});
  CHECK(far.delays[2] == doctest::Approx(-0.2 / 343.0).epsilon(1e-6));

  // Translation invariance.
  ArrayGeometry moved = g;
  const Vec3 shift{0.3, -1.2, 2.0};
  for (Vec3& p : moved.mic_positions) p = p + shift;
  const Vec3 src{0.4, 0.1, 0.7};
  const auto a = mcse::steering_delays(g, src), b = mcse::steering_delays(moved, src + shift);
  for (std::size_t c = 0; c < 6; ++c) CHECK(a.delays[c] == doctest::Approx(b.delays[c]).epsilon(1e-12));
}

TEST_CASE("align rotates phases without touching magnitudes") {
  const mcse::Spectrogram s = testing::random_spectrogram(6, 5, 3);
  const auto loc = mcse::steering_delays(ArrayGeometry::tablet(), {0.3, -0.2, 0.4});
  const mcse::Spectrogram a = mcse::align(s, loc);
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t t = 0; t < 5; ++t) {
      for (std::size_t k = 0; k < s.bins(); k += 37) {
        CHECK(std::abs(a.at(c, t, k)) == doctest::Approx(std::abs(s.at(c, t, k))).epsilon(1e-14));
        const double want = 2.0 * std::numbers::pi * s.bin_frequency(k) * loc.delays[c];
        const testing::cplx rot = a.at(c, t, k) / s.at(c, t, k);
        CHECK(std::abs(rot - std::polar(1.0, want)) < 1e-12);
      }
    }
  }
}

TEST_CASE("aligning a delayed source makes the channels coherent") {
  // Channel c carries s(t - tau_c) via an exact FFT phase ramp.
  const ArrayGeometry g = ArrayGeometry::tablet();
  const Vec3 src{-0.2, 0.1, 0.4};
  const auto loc = mcse::steering_delays(g, src);
  mcse::SceneSpec spec;
  spec.duration_seconds = 4.0;
  spec.target.position = src;
  spec.target.kind = mcse::SignalKind::kWhiteNoise;
  spec.diffuse_snr_db.reset();
  const mcse::Scene scene = mcse::simulate_scene(spec);
  const mcse::Spectrogram a = mcse::align(mcse::stft_analyze(scene.target_images, {}), loc);
  // After alignment the cross-spectrum phase to channel 0 vanishes, up to the
  // error of treating a sub-window delay as a per-bin phase.
  double worst = 0.0, mean = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 1; c < 6; ++c) {
    for (std::size_t k = 10; k < 500; k += 7) {
      testing::cplx sxy{};
      for (std::size_t t = 0; t < a.frames(); ++t) sxy += a.at(c, t, k) * std::conj(a.at(0, t, k));
      worst = std::max(worst, std::abs(std::arg(sxy)));
      mean += std::abs(std::arg(sxy));
      ++count;
    }
  }
  CHECK(mean / static_cast<double>(count) < 0.02);
  CHECK(worst < 0.1);
}

TEST_CASE("healthy array has no failures") {
  const MultichannelWave w = speech_scene(3);
  const mcse::ChannelStatus s = mcse::detect_failures(w, ArrayGeometry::tablet());
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK_FALSE(s.failed[c]);
    CHECK(s.max_correlation[c] > 0.3);
    CHECK(s.max_correlation[c] <= 1.0 + 1e-12);
  }
  CHECK(s.usable().size() == 6);
}

TEST_CASE("dead and attenuated channels fail the RMS rule") {
  MultichannelWave w = speech_scene(4);
  for (double& v : w.channel(4)) v = 0.0;
  for (double& v : w.channel(5)) v *= 0.05;  // -26 dB
  const mcse::ChannelStatus s = mcse::detect_failures(w, ArrayGeometry::tablet());
  CHECK(s.failed[4]);
  CHECK(std::isinf(s.rms_deviation_db[4]));
  CHECK(s.failed[5]);
  CHECK(s.rms_deviation_db[5] < -20.0);
  CHECK(s.usable() == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("independent noise at matched level fails the correlation rule") {
  MultichannelWave w = speech_scene(5);
  double energy = 0.0;
  for (double v : w.channel(3)) energy += v * v;
  const MultichannelWave noise = testing::random_wave(1, w.length(), w.sample_rate(), 99,
                                                      std::sqrt(energy / static_cast<double>(w.length())));
  std::copy(noise.channel(0).begin(), noise.channel(0).end(), w.channel(3).begin());
  const mcse::ChannelStatus s = mcse::detect_failures(w, ArrayGeometry::tablet());
  CHECK(std::abs(s.rms_deviation_db[3]) < 1.0);
  CHECK(s.max_correlation[3] < 0.1);
  CHECK(s.failed[3]);
  CHECK(s.usable().size() == 5);
}

TEST_CASE("failure detection is permutation-equivariant") {
  MultichannelWave w = speech_scene(6);
  for (double& v : w.channel(2)) v = 0.0;
  ArrayGeometry g = ArrayGeometry::tablet();
  g.pdm_excluded.clear();
  const std::vector<std::size_t> perm{3, 0, 5, 1, 2, 4};
  MultichannelWave p(6, w.length(), w.sample_rate());
  ArrayGeometry gp = g;
  for (std::size_t c = 0; c < 6; ++c) {
    std::copy(w.channel(perm[c]).begin(), w.channel(perm[c]).end(), p.channel(c).begin());
    gp.mic_positions[c] = g.mic_positions[perm[c]];
  }
  const auto a = mcse::detect_failures(w, g), b = mcse::detect_failures(p, gp);
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK(b.failed[c] == a.failed[perm[c]]);
    const double x = b.rms_deviation_db[c], y = a.rms_deviation_db[perm[c]];
    if (std::isinf(y)) {
      CHECK(x == y);
    } else {
      CHECK(x == doctest::Approx(y).epsilon(1e-9));
    }
  }
}

TEST_CASE("all channels silent is a typed error") {
  const MultichannelWave w(6, 16000, 16000.0);
  try {
    mcse::detect_failures(w, ArrayGeometry::tablet());
    FAIL("expected an error");
  } catch (const mcse::Error& e) {
    CHECK(e.code() == mcse::ErrorCode::kNoUsableChannels);
  }
}
