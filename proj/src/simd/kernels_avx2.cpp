// Compiled with -mavx2 only; reached through avx2_kernels() after a CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "mcse/simd/kernels.hpp"

namespace mcse::simd {
namespace detail {
const KernelTable& avx2_table();
}

namespace {

// Two complex doubles per register: [re0, im0, re1, im1].
inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d neg_odd() { return _mm256_set_pd(-0.0, 0.0, -0.0, 0.0); }

// a * conj(b): [ar*br + ai*bi, ai*br - ar*bi]
inline __m256d mul_conj(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0b1111);
  const __m256d a_swap = _mm256_permute_pd(a, 0b0101);
  const __m256d t1 = _mm256_mul_pd(a, b_re);
  const __m256d t2 = _mm256_xor_pd(_mm256_mul_pd(a_swap, b_im), neg_odd());
  return _mm256_add_pd(t1, t2);
}

// a * p: [ar*pr - ai*pi, ai*pr + ar*pi]
inline __m256d mul(__m256d a, __m256d p) {
  const __m256d p_re = _mm256_movedup_pd(p);
  const __m256d p_im = _mm256_permute_pd(p, 0b1111);
  const __m256d a_swap = _mm256_permute_pd(a, 0b0101);
  return _mm256_addsub_pd(_mm256_mul_pd(a, p_re), _mm256_mul_pd(a_swap, p_im));
}

// |z|^2 of four complex values held in two registers, returned in order.
inline __m256d norm4(__m256d z01, __m256d z23) {
  const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(z01, z01), _mm256_mul_pd(z23, z23));
  return _mm256_permute4x64_pd(h, 0b11011000);
}

// [g0, g1] -> [g0, g0, g1, g1]
inline __m256d spread2(const double* g) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(g)), 0b01010000);
}

void cross_accumulate(const cplx* a, const cplx* b, cplx* acc, std::size_t n) {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    store2(acc + k, _mm256_add_pd(load2(acc + k), mul_conj(load2(a + k), load2(b + k))));
  }
  if (k < n) scalar_kernels().cross_accumulate(a + k, b + k, acc + k, n - k);
}

void power_accumulate(const cplx* a, double* acc, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d p = norm4(load2(a + k), load2(a + k + 2));
    _mm256_storeu_pd(acc + k, _mm256_add_pd(_mm256_loadu_pd(acc + k), p));
  }
  if (k < n) scalar_kernels().power_accumulate(a + k, acc + k, n - k);
}

void complex_accumulate(const cplx* a, cplx* acc, std::size_t n) {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) store2(acc + k, _mm256_add_pd(load2(acc + k), load2(a + k)));
  if (k < n) scalar_kernels().complex_accumulate(a + k, acc + k, n - k);
}

void complex_multiply(cplx* x, const cplx* p, std::size_t n) {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) store2(x + k, mul(load2(x + k), load2(p + k)));
  if (k < n) scalar_kernels().complex_multiply(x + k, p + k, n - k);
}

void multiply_accumulate(const cplx* a, const cplx* p, cplx* acc, std::size_t n) {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    store2(acc + k, _mm256_add_pd(load2(acc + k), mul(load2(a + k), load2(p + k))));
  }
  if (k < n) scalar_kernels().multiply_accumulate(a + k, p + k, acc + k, n - k);
}

void phat_accumulate(const cplx* a, const cplx* b, cplx* acc, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d z = mul_conj(load2(a + k), load2(b + k));
    const __m256d sq = _mm256_mul_pd(z, z);
    const __m256d m2 = _mm256_hadd_pd(sq, sq);  // [|z0|^2, |z0|^2, |z1|^2, |z1|^2]
    const __m256d nonzero = _mm256_cmp_pd(m2, zero, _CMP_GT_OQ);
    const __m256d q = _mm256_div_pd(z, _mm256_sqrt_pd(m2));
    store2(acc + k, _mm256_add_pd(load2(acc + k), _mm256_and_pd(q, nonzero)));
  }
  if (k < n) scalar_kernels().phat_accumulate(a + k, b + k, acc + k, n - k);
}

void coherence_accumulate(const cplx* sxy, const double* sxx, const double* syy, double* acc,
                          std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d num = norm4(load2(sxy + k), load2(sxy + k + 2));
    const __m256d den = _mm256_mul_pd(_mm256_loadu_pd(sxx + k), _mm256_loadu_pd(syy + k));
    const __m256d valid = _mm256_cmp_pd(den, zero, _CMP_GT_OQ);
    const __m256d c = _mm256_and_pd(_mm256_min_pd(_mm256_div_pd(num, den), one), valid);
    _mm256_storeu_pd(acc + k, _mm256_add_pd(_mm256_loadu_pd(acc + k), c));
  }
  if (k < n) scalar_kernels().coherence_accumulate(sxy + k, sxx + k, syy + k, acc + k, n - k);
}

void apply_gain(cplx* x, const double* g, std::size_t n) {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) store2(x + k, _mm256_mul_pd(load2(x + k), spread2(g + k)));
  if (k < n) scalar_kernels().apply_gain(x + k, g + k, n - k);
}

void scale(cplx* x, double s, std::size_t n) {
  const __m256d v = _mm256_set1_pd(s);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) store2(x + k, _mm256_mul_pd(load2(x + k), v));
  if (k < n) scalar_kernels().scale(x + k, s, n - k);
}

}  // namespace

const KernelTable& detail::avx2_table() {
  static const KernelTable table{
      "avx2",           cross_accumulate,    power_accumulate, complex_accumulate,
      complex_multiply, multiply_accumulate, phat_accumulate,  coherence_accumulate,
      apply_gain,       scale,
  };
  return table;
}

}  // namespace mcse::simd
