#include <doctest.h>

#include <fstream>
#include <numbers>

#include "mcse/error.hpp"
#include "mcse/filterbank.hpp"
#include "mcse/localizer.hpp"
#include "mcse/simulation.hpp"
#include "support.hpp"

using mcse::ArrayGeometry;
using mcse::GridConfig;
using mcse::SearchGrid;
using mcse::Vec3;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 on_sphere(const ArrayGeometry& g, double az_deg, double el_deg, double radius = 0.4) {
  const double az = az_deg * kDeg, el = el_deg * kDeg;
  return g.centroid() + Vec3{std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)} * radius;
}

mcse::Spectrogram scene_spec(const Vec3& src, std::optional<double> diffuse_snr, std::uint64_t seed) {
  mcse::SceneSpec spec;
  spec.duration_seconds = 2.0;
  spec.target.position = src;
  spec.diffuse_snr_db = diffuse_snr;
  spec.seed = seed;
  return mcse::stft_analyze(mcse::simulate_scene(spec).mixture, {});
}

}  // namespace

TEST_CASE("default grid layout") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  const SearchGrid grid = SearchGrid::spherical(g, GridConfig{});
  REQUIRE(grid.candidates.size() == 72 * 7);
  // Elevation-major: first row at -30 degrees, azimuth from -180.
  CHECK(distance(grid.candidates[0], on_sphere(g, -180.0, -30.0)) < 1e-12);
  CHECK(distance(grid.candidates[1], on_sphere(g, -175.0, -30.0)) < 1e-12);
  CHECK(distance(grid.candidates[72], on_sphere(g, -180.0, -20.0)) < 1e-12);
  CHECK(distance(grid.candidates[3 * 72 + 36], on_sphere(g, 0.0, 0.0)) < 1e-12);
  for (const Vec3& c : grid.candidates) CHECK(distance(c, g.centroid()) == doctest::Approx(0.4));
  // Azimuth 0 at zero elevation faces +z.
  const Vec3 front = grid.candidates[3 * 72 + 36] - g.centroid();
  CHECK(front.z == doctest::Approx(0.4));
}

TEST_CASE("noise-free source on a grid point is found exactly") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  const SearchGrid grid = SearchGrid::spherical(g, GridConfig{});
  for (std::size_t idx : {3u * 72 + 42, 2u * 72 + 20, 5u * 72 + 60, 3u * 72 + 36}) {
    CAPTURE(idx);
    const mcse::Spectrogram s = scene_spec(grid.candidates[idx], std::nullopt, idx);
    const auto r = mcse::srp_phat(s, g, grid, mcse::ChannelStatus::all_ok(6));
    CHECK(r.candidate == idx);
    CHECK(r.location.position == grid.candidates[idx]);
    CHECK(r.scores.size() == grid.candidates.size());
  }
}

TEST_CASE("source between grid points at 20 dB SNR maps to the nearest point") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  const SearchGrid grid = SearchGrid::spherical(g, GridConfig{});
  const Vec3 src = on_sphere(g, 31.5, 1.5);
  std::size_t nearest = 0;
  for (std::size_t c = 1; c < grid.candidates.size(); ++c) {
    if (distance(grid.candidates[c], src) < distance(grid.candidates[nearest], src)) nearest = c;
  }
  CHECK(nearest == 3 * 72 + 42);
  const auto r = mcse::srp_phat(scene_spec(src, 20.0, 7), g, grid, mcse::ChannelStatus::all_ok(6));
  CHECK(r.candidate == nearest);
}

TEST_CASE("scores ignore per-channel gains") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  const SearchGrid grid = SearchGrid::spherical(g, GridConfig{});
  mcse::Spectrogram s = scene_spec(on_sphere(g, -40.0, 10.0), 10.0, 3);
  const auto a = mcse::srp_phat(s, g, grid, mcse::ChannelStatus::all_ok(6));
  for (std::size_t t = 0; t < s.frames(); ++t) {
    for (auto& v : s.frame(2, t)) v *= 7.5;
    for (auto& v : s.frame(4, t)) v *= 0.01;
  }
  const auto b = mcse::srp_phat(s, g, grid, mcse::ChannelStatus::all_ok(6));
  CHECK(a.candidate == b.candidate);
  for (std::size_t c = 0; c < a.scores.size(); ++c) {
    CHECK(b.scores[c] == doctest::Approx(a.scores[c]).epsilon(1e-9).scale(1e-9 * s.frames()));
  }
}

TEST_CASE("failed channels do not contribute") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  const SearchGrid grid = SearchGrid::spherical(g, GridConfig{});
  mcse::Spectrogram s = scene_spec(on_sphere(g, 60.0, -10.0), 10.0, 4);
  mcse::ChannelStatus status = mcse::ChannelStatus::all_ok(6);
  status.failed[4] = true;
  const auto a = mcse::srp_phat(s, g, grid, status);
  const auto noise = testing::random_complex(s.frames() * s.bins(), 77);
  for (std::size_t t = 0; t < s.frames(); ++t) {
    std::copy_n(noise.begin() + static_cast<std::ptrdiff_t>(t * s.bins()), s.bins(), s.frame(4, t).begin());
  }
  const auto b = mcse::srp_phat(s, g, grid, status);
  CHECK(a.scores == b.scores);

  // Clean data: dropping a channel removes non-negative terms at the true
  // location, keeps the winner, and each remaining pair is bounded by one
  // unit per frame and bin.
  const mcse::Spectrogram clean = scene_spec(on_sphere(g, 60.0, -10.0), std::nullopt, 4);
  const auto full = mcse::srp_phat(clean, g, grid, mcse::ChannelStatus::all_ok(6));
  const auto reduced = mcse::srp_phat(clean, g, grid, status);
  CHECK(reduced.candidate == full.candidate);
  CHECK(reduced.scores[reduced.candidate] <= full.scores[full.candidate]);
  const double per_pair = reduced.scores[reduced.candidate] / 10.0;
  CHECK(per_pair <= static_cast<double>(clean.frames() * clean.bins()));
}

TEST_CASE("ties resolve to the lowest candidate and degenerate input is rejected") {
  const ArrayGeometry g = ArrayGeometry::tablet();
  const SearchGrid grid = SearchGrid::spherical(g, GridConfig{});
  const mcse::Spectrogram zero(6, 10, mcse::StftConfig{}, 16000.0, 2560);
  const auto r = mcse::srp_phat(zero, g, grid, mcse::ChannelStatus::all_ok(6));
  CHECK(r.candidate == 0);
  mcse::ChannelStatus one = mcse::ChannelStatus::all_ok(6);
  for (std::size_t c = 1; c < 6; ++c) one.failed[c] = true;
  CHECK_THROWS_AS(mcse::srp_phat(zero, g, grid, one), mcse::Error);
}

TEST_CASE("scores CSV") {
  testing::TempDir dir;
  const ArrayGeometry g = ArrayGeometry::tablet();
  GridConfig cfg;
  cfg.azimuth_step_deg = 90.0;
  cfg.elevation_min_deg = 0.0;
  cfg.elevation_max_deg = 0.0;
  const SearchGrid grid = SearchGrid::spherical(g, cfg);
  REQUIRE(grid.candidates.size() == 4);
  mcse::write_scores_csv(dir / "s.csv", grid, {1.0, 2.0, 3.0, 4.5});
  std::ifstream in(dir / "s.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "candidate,x,y,z,score");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}
