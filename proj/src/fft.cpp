#include "mcse/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "mcse/error.hpp"

namespace mcse {
namespace {
// The FFTW planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  std::size_t n;
  double* real;
  fftw_complex* spec;
  fftw_plan fwd;
  fftw_plan inv;

  explicit Impl(std::size_t size) : n(size) {
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    const int ni = static_cast<int>(n);
    fwd = fftw_plan_dft_r2c_1d(ni, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(ni, spec, real, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(std::size_t n) {
  require(n >= 2, ErrorCode::kInvalidArgument, "FFT size must be at least 2");
  impl_ = std::make_unique<Impl>(n);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

std::size_t RealFft::size() const noexcept { return impl_->n; }

void RealFft::forward(std::span<const double> in, std::span<cplx> out) {
  const std::size_t n = impl_->n;
  require(in.size() <= n && out.size() == n / 2 + 1, ErrorCode::kShapeMismatch,
          "RealFft::forward buffer sizes");
  std::copy(in.begin(), in.end(), impl_->real);
  std::fill(impl_->real + in.size(), impl_->real + n, 0.0);
  fftw_execute(impl_->fwd);
  const auto* s = reinterpret_cast<const cplx*>(impl_->spec);
  std::copy(s, s + out.size(), out.begin());
}

void RealFft::inverse(std::span<const cplx> in, std::span<double> out) {
  const std::size_t n = impl_->n;
  require(in.size() == n / 2 + 1 && out.size() <= n, ErrorCode::kShapeMismatch,
          "RealFft::inverse buffer sizes");
  auto* s = reinterpret_cast<cplx*>(impl_->spec);
  std::copy(in.begin(), in.end(), s);
  // c2r assumes a Hermitian spectrum; DC and Nyquist are taken as real.
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = impl_->real[i] * scale;
}

}  // namespace mcse
