#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "mcse/wave.hpp"

namespace mcse {

// Real-input DFT of fixed size n, backed by FFTW. Forward produces n/2+1
// one-sided bins, unnormalized; inverse applies the 1/n factor so that
// inverse(forward(x)) == x.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept;
  std::size_t bins() const noexcept { return size() / 2 + 1; }

  void forward(std::span<const double> in, std::span<cplx> out);
  void inverse(std::span<const cplx> in, std::span<double> out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mcse
