#pragma once

// Data-parallel inner loops shared by the maskers, the localizer, the
// calibration and the simulator. Every kernel has a scalar reference
// implementation; SIMD variants perform the same IEEE operations in the same
// order, so results are bit-identical to the reference.

#include <complex>
#include <cstddef>
#include <string_view>

namespace mcse::simd {

using cplx = std::complex<double>;

struct KernelTable {
  const char* name;
  // acc[k] += a[k] * conj(b[k])
  void (*cross_accumulate)(const cplx* a, const cplx* b, cplx* acc, std::size_t n);
  // acc[k] += |a[k]|^2
  void (*power_accumulate)(const cplx* a, double* acc, std::size_t n);
  // acc[k] += a[k]
  void (*complex_accumulate)(const cplx* a, cplx* acc, std::size_t n);
  // x[k] *= p[k]
  void (*complex_multiply)(cplx* x, const cplx* p, std::size_t n);
  // acc[k] += a[k] * p[k]
  void (*multiply_accumulate)(const cplx* a, const cplx* p, cplx* acc, std::size_t n);
  // acc[k] += z / |z| with z = a[k] * conj(b[k]); zero when |z| == 0
  void (*phat_accumulate)(const cplx* a, const cplx* b, cplx* acc, std::size_t n);
  // acc[k] += min(1, |sxy|^2 / (sxx * syy)); zero when sxx * syy == 0
  void (*coherence_accumulate)(const cplx* sxy, const double* sxx, const double* syy,
                               double* acc, std::size_t n);
  // x[k] *= g[k] (real gain)
  void (*apply_gain)(cplx* x, const double* g, std::size_t n);
  // x[k] *= s
  void (*scale)(cplx* x, double s, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not built or the CPU lacks the instructions.
const KernelTable* avx2_kernels();

// Kernel set used by the library. Chosen once from CPU features; the
// environment variable MCSE_SIMD=scalar forces the reference kernels.
const KernelTable& kernels();

// Overrides the active table ("scalar", "avx2" or "auto"). Returns false if
// the requested variant is unavailable. Not thread-safe; call at startup.
bool select_kernels(std::string_view name);

}  // namespace mcse::simd
