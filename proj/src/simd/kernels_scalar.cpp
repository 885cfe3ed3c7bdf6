#include <algorithm>
#include <cmath>

#include "mcse/simd/kernels.hpp"

namespace mcse::simd {
namespace {

// std::complex arithmetic goes through NaN-recovery helpers; the kernels spell
// out the real arithmetic so the SIMD variants can mirror it exactly.

void cross_accumulate(const cplx* a, const cplx* b, cplx* acc, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double br = b[k].real(), bi = b[k].imag();
    acc[k] = {acc[k].real() + (ar * br + ai * bi), acc[k].imag() + (ai * br - ar * bi)};
  }
}

void power_accumulate(const cplx* a, double* acc, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    acc[k] += ar * ar + ai * ai;
  }
}

void complex_accumulate(const cplx* a, cplx* acc, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    acc[k] = {acc[k].real() + a[k].real(), acc[k].imag() + a[k].imag()};
  }
}

void complex_multiply(cplx* x, const cplx* p, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double xr = x[k].real(), xi = x[k].imag();
    const double pr = p[k].real(), pi = p[k].imag();
    x[k] = {xr * pr - xi * pi, xi * pr + xr * pi};
  }
}

void multiply_accumulate(const cplx* a, const cplx* p, cplx* acc, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double pr = p[k].real(), pi = p[k].imag();
    acc[k] = {acc[k].real() + (ar * pr - ai * pi), acc[k].imag() + (ai * pr + ar * pi)};
  }
}

void phat_accumulate(const cplx* a, const cplx* b, cplx* acc, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double br = b[k].real(), bi = b[k].imag();
    const double zr = ar * br + ai * bi;
    const double zi = ai * br - ar * bi;
    const double m2 = zr * zr + zi * zi;
    if (m2 > 0.0) {
      const double m = std::sqrt(m2);
      acc[k] = {acc[k].real() + zr / m, acc[k].imag() + zi / m};
    }
  }
}

void coherence_accumulate(const cplx* sxy, const double* sxx, const double* syy, double* acc,
                          std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double r = sxy[k].real(), i = sxy[k].imag();
    const double num = r * r + i * i;
    const double den = sxx[k] * syy[k];
    const double c = den > 0.0 ? std::min(num / den, 1.0) : 0.0;
    acc[k] += c;
  }
}

void apply_gain(cplx* x, const double* g, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) x[k] = {x[k].real() * g[k], x[k].imag() * g[k]};
}

void scale(cplx* x, double s, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) x[k] = {x[k].real() * s, x[k].imag() * s};
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",         cross_accumulate,     power_accumulate, complex_accumulate,
      complex_multiply, multiply_accumulate,  phat_accumulate,  coherence_accumulate,
      apply_gain,       scale,
  };
  return table;
}

}  // namespace mcse::simd
