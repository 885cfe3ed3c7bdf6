#include "mcse/localizer.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "mcse/error.hpp"
#include "mcse/simd/kernels.hpp"

namespace mcse {

SearchGrid SearchGrid::spherical(const ArrayGeometry& geometry, const GridConfig& config) {
  require(config.azimuth_step_deg > 0.0 && config.elevation_step_deg > 0.0 && config.radius > 0.0,
          ErrorCode::kInvalidArgument, "grid steps and radius must be positive");
  require(config.elevation_max_deg >= config.elevation_min_deg, ErrorCode::kInvalidArgument,
          "elevation range is empty");
  constexpr double deg = std::numbers::pi / 180.0;
  const Vec3 center = geometry.centroid();
  SearchGrid grid;
  const auto n_el = static_cast<std::size_t>(
      std::floor((config.elevation_max_deg - config.elevation_min_deg) / config.elevation_step_deg +
                 1e-9)) + 1;
  const auto n_az = static_cast<std::size_t>(std::ceil(360.0 / config.azimuth_step_deg - 1e-9));
  for (std::size_t e = 0; e < n_el; ++e) {
    const double el = (config.elevation_min_deg + static_cast<double>(e) * config.elevation_step_deg) * deg;
    for (std::size_t a = 0; a < n_az; ++a) {
      const double az = (-180.0 + static_cast<double>(a) * config.azimuth_step_deg) * deg;
      // Azimuth 0 faces the talker side (+z); positive azimuth turns toward +x,
      // positive elevation toward +y.
      const Vec3 dir{std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
      grid.candidates.push_back(center + dir * config.radius);
    }
  }
  return grid;
}

LocalizerResult srp_phat(const Spectrogram& spec, const ArrayGeometry& geometry,
                         const SearchGrid& grid, const ChannelStatus& status) {
  require(!grid.candidates.empty(), ErrorCode::kInvalidArgument, "empty search grid");
  require(spec.channels() == geometry.channels() && status.channels() == spec.channels(),
          ErrorCode::kShapeMismatch, "spectrogram, geometry and status channel counts differ");
  const std::vector<std::size_t> usable = status.usable();
  require(usable.size() >= 2, ErrorCode::kDegenerate,
          "SRP-PHAT needs at least 2 usable channels");

  // Frame-summed phase-transformed cross spectra per pair; scoring a
  // candidate then costs one pass over the bins per pair.
  const std::size_t bins = spec.bins();
  struct Pair {
    std::size_t i, j;
    std::vector<cplx> phat;
  };
  std::vector<Pair> pairs;
  const auto& kern = simd::kernels();
  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      Pair p{usable[a], usable[b], std::vector<cplx>(bins)};
      for (std::size_t t = 0; t < spec.frames(); ++t) {
        kern.phat_accumulate(spec.frame(p.i, t).data(), spec.frame(p.j, t).data(), p.phat.data(),
                             bins);
      }
      pairs.push_back(std::move(p));
    }
  }

  std::vector<double> omega(bins);
  for (std::size_t k = 0; k < bins; ++k) omega[k] = 2.0 * std::numbers::pi * spec.bin_frequency(k);

  LocalizerResult result;
  result.scores.resize(grid.candidates.size());
  double best = -INFINITY;
  for (std::size_t c = 0; c < grid.candidates.size(); ++c) {
    const SourceLocation loc = steering_delays(geometry, grid.candidates[c]);
    double score = 0.0;
    for (const Pair& p : pairs) {
      // X_i X_j^* carries exp(-j w (tau_i - tau_j)) for a source at the candidate.
      const double dtau = loc.delays[p.i] - loc.delays[p.j];
      for (std::size_t k = 0; k < bins; ++k) {
        const double ph = omega[k] * dtau;
        score += p.phat[k].real() * std::cos(ph) - p.phat[k].imag() * std::sin(ph);
      }
    }
    result.scores[c] = score;
    if (score > best) {
      best = score;
      result.candidate = c;
    }
  }
  result.location = steering_delays(geometry, grid.candidates[result.candidate]);
  return result;
}

void write_scores_csv(const std::filesystem::path& path, const SearchGrid& grid,
                      const std::vector<double>& scores) {
  require(scores.size() == grid.candidates.size(), ErrorCode::kShapeMismatch,
          "score count differs from grid size");
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << "candidate,x,y,z,score\n";
  out.precision(10);
  for (std::size_t c = 0; c < scores.size(); ++c) {
    const Vec3& p = grid.candidates[c];
    out << c << ',' << p.x << ',' << p.y << ',' << p.z << ',' << scores[c] << '\n';
  }
}

}  // namespace mcse
