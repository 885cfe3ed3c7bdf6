#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "mcse/array.hpp"
#include "mcse/spectrogram.hpp"

namespace mcse {

struct GridConfig {
  double azimuth_step_deg = 5.0;  // azimuth spans [-180, 180)
  double elevation_min_deg = -30.0;
  double elevation_max_deg = 30.0;
  double elevation_step_deg = 10.0;
  double radius = 0.4;  // meters from the array centroid
};

struct SearchGrid {
  std::vector<Vec3> candidates;

  // Candidates ordered elevation-major, then azimuth ascending. Azimuth is
  // measured in the x-z plane from +z (the talker side of the array) toward
  // +x; elevation tilts toward +y.
  static SearchGrid spherical(const ArrayGeometry& geometry, const GridConfig& config);
};

struct LocalizerResult {
  SourceLocation location;
  std::size_t candidate = 0;
  std::vector<double> scores;  // one per grid candidate
};

// Batch SRP-PHAT over the whole utterance, restricted to usable channels.
// Ties resolve to the lowest candidate index.
LocalizerResult srp_phat(const Spectrogram& spec, const ArrayGeometry& geometry,
                         const SearchGrid& grid, const ChannelStatus& status);

void write_scores_csv(const std::filesystem::path& path, const SearchGrid& grid,
                      const std::vector<double>& scores);

}  // namespace mcse
