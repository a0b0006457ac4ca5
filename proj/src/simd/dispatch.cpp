#include <cstdlib>
#include <string_view>

#include "pidalign/simd/kernels.hpp"

namespace pidalign::simd {

#if defined(PIDALIGN_HAVE_AVX2)
const KernelSet& avx2_kernel_table();
#endif

const KernelSet* avx2_kernels() {
#if defined(PIDALIGN_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active_kernels() {
  static const KernelSet* chosen = [] {
    const char* env = std::getenv("PIDALIGN_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelSet* k = avx2_kernels()) return k;
    return &scalar_kernels();
  }();
  return *chosen;
}

std::vector<const KernelSet*> available_kernels() {
  std::vector<const KernelSet*> out{&scalar_kernels()};
  if (const KernelSet* k = avx2_kernels()) out.push_back(k);
  return out;
}

}  // namespace pidalign::simd
