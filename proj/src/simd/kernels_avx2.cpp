// Compiled with -mavx2 -mfma -ffp-contract=off; only reached after a runtime
// CPU check.
#include <immintrin.h>

#include <cmath>
#include <limits>

#include "pidalign/simd/kernels.hpp"

namespace pidalign::simd {
namespace {

// exp(x) for 4 doubles: 2^n * p(r) with r = x - n ln2, |r| <= ln2/2 and p the
// degree-13 Taylor polynomial (truncation error < 1e-17 relative). 2^n is
// applied as two factors so that n = 1024 and subnormal results stay exact
// up to the final rounding. NaN propagates.
inline __m256d exp4(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-746.0);
  const __m256d hi = _mm256_set1_pd(710.0);
  const __m256d overflow = _mm256_set1_pd(709.78271289338397);
  const __m256d orig = x;
  x = _mm256_min_pd(hi, _mm256_max_pd(lo, x));

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));

  auto pow2 = [](__m256d k) {
    __m256i bits = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(k));
    bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(bits);
  };
  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2(n1)), pow2(n2));

  result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                            _mm256_cmp_pd(orig, overflow, _CMP_GT_OQ));
  // Keep NaN inputs NaN.
  return _mm256_blendv_pd(result, orig, _mm256_cmp_pd(orig, orig, _CMP_UNORD_Q));
}

inline double hmax(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return std::fmax(std::fmax(lane[0], lane[1]), std::fmax(lane[2], lane[3]));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double logsumexp_offset(const double* x, const double* offset, std::size_t n) {
  std::size_t j = 0;
  __m256d vmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  for (; j + 4 <= n; j += 4)
    vmax = _mm256_max_pd(vmax, _mm256_add_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(offset + j)));
  double top = hmax(vmax);
  for (; j < n; ++j) top = std::fmax(top, x[j] + offset[j]);
  if (!std::isfinite(top)) return top;

  const __m256d shift = _mm256_set1_pd(-top);
  __m256d acc = _mm256_setzero_pd();
  j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d v = _mm256_add_pd(_mm256_add_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(offset + j)), shift);
    acc = _mm256_add_pd(acc, exp4(v));
  }
  double sum = hsum(acc);
  for (; j < n; ++j) sum += std::exp(x[j] + offset[j] - top);
  return top + std::log(sum);
}

void exp_offset(const double* x, double shift, const double* offset, double* out, std::size_t n) {
  const __m256d s = _mm256_set1_pd(shift);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d v = _mm256_add_pd(_mm256_add_pd(_mm256_loadu_pd(x + j), s), _mm256_loadu_pd(offset + j));
    _mm256_storeu_pd(out + j, exp4(v));
  }
  for (; j < n; ++j) out[j] = std::exp(x[j] + shift + offset[j]);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    _mm256_storeu_pd(y + j + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4)));
  }
  for (; j + 4 <= n; j += 4)
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  for (; j < n; ++j) y[j] += a * x[j];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4), a1);
  }
  for (; j + 4 <= n; j += 4) a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j), a0);
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; j < n; ++j) s += x[j] * y[j];
  return s;
}

double min_sq_distance(double px, double py, double pz, const double* xs, const double* ys, const double* zs,
                       std::size_t n) {
  const __m256d vx = _mm256_set1_pd(px);
  const __m256d vy = _mm256_set1_pd(py);
  const __m256d vz = _mm256_set1_pd(pz);
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(vx, _mm256_loadu_pd(xs + i));
    const __m256d dy = _mm256_sub_pd(vy, _mm256_loadu_pd(ys + i));
    const __m256d dz = _mm256_sub_pd(vz, _mm256_loadu_pd(zs + i));
    // No FMA here: the sum must round exactly like the scalar reference.
    const __m256d d = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
    best = _mm256_min_pd(best, d);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, best);
  double out = std::fmin(std::fmin(lane[0], lane[1]), std::fmin(lane[2], lane[3]));
  for (; i < n; ++i) {
    const double dx = px - xs[i];
    const double dy = py - ys[i];
    const double dz = pz - zs[i];
    const double d = dx * dx + dy * dy + dz * dz;
    if (d < out) out = d;
  }
  return out;
}

}  // namespace

const KernelSet& avx2_kernel_table() {
  static const KernelSet set{"avx2", logsumexp_offset, exp_offset, axpy, dot, min_sq_distance};
  return set;
}

}  // namespace pidalign::simd
