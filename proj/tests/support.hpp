#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <unistd.h>
#include <vector>

#include "mcse/spectrogram.hpp"
#include "mcse/wave.hpp"

namespace testing {

using cplx = std::complex<double>;

inline mcse::MultichannelWave random_wave(std::size_t channels, std::size_t length, double fs,
                                          std::uint64_t seed, double sigma = 0.1) {
  mcse::MultichannelWave w(channels, length, fs);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  for (std::size_t c = 0; c < channels; ++c) {
    for (double& v : w.channel(c)) v = g(rng);
  }
  return w;
}

inline std::vector<cplx> random_complex(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<cplx> v(n);
  for (cplx& z : v) z = {g(rng), g(rng)};
  return v;
}

// Spectrogram filled with i.i.d. complex Gaussian coefficients.
inline mcse::Spectrogram random_spectrogram(std::size_t channels, std::size_t frames, std::uint64_t seed,
                                            mcse::StftConfig cfg = {}, double fs = 16000.0) {
  mcse::Spectrogram s(channels, frames, cfg, fs, frames * cfg.hop);
  const auto v = random_complex(s.data().size(), seed);
  std::copy(v.begin(), v.end(), s.data().begin());
  return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mcse_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
