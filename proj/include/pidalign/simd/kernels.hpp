#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Data-parallel inner loops of the pipeline. Every kernel has a scalar
// reference implementation; wider variants are selected at runtime and must
// agree with the reference (bit-exactly for min_sq_distance, to rounding for
// the rest).
namespace pidalign::simd {

struct KernelSet {
  std::string_view name;

  // log(sum_j exp(x[j] + offset[j])); -inf when every term is -inf.
  double (*logsumexp_offset)(const double* x, const double* offset, std::size_t n);

  // out[j] = exp(x[j] + shift + offset[j])
  void (*exp_offset)(const double* x, double shift, const double* offset, double* out, std::size_t n);

  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  double (*dot)(const double* x, const double* y, std::size_t n);

  // min_i (px-xs[i])^2 + (py-ys[i])^2 + (pz-zs[i])^2, +inf for n == 0.
  double (*min_sq_distance)(double px, double py, double pz, const double* xs, const double* ys,
                            const double* zs, std::size_t n);
};

const KernelSet& scalar_kernels();

// nullptr unless built with AVX2 support and the CPU has AVX2 + FMA.
const KernelSet* avx2_kernels();

// Widest supported set; PIDALIGN_SIMD=scalar forces the reference kernels.
const KernelSet& active_kernels();

std::vector<const KernelSet*> available_kernels();

}  // namespace pidalign::simd
