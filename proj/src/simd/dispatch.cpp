#include <cstdlib>
#include <string_view>

#include "mcse/simd/kernels.hpp"

namespace mcse::simd {

#if defined(MCSE_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2_kernels() {
#if defined(MCSE_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* best_available() {
  if (const char* env = std::getenv("MCSE_SIMD"); env && std::string_view(env) == "scalar") {
    return &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

const KernelTable*& active() {
  static const KernelTable* table = best_available();
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active(); }

bool select_kernels(std::string_view name) {
  if (name == "scalar") {
    active() = &scalar_kernels();
    return true;
  }
  if (name == "avx2") {
    if (const KernelTable* t = avx2_kernels()) {
      active() = t;
      return true;
    }
    return false;
  }
  if (name == "auto") {
    active() = best_available();
    return true;
  }
  return false;
}

}  // namespace mcse::simd
