#include <cmath>
#include <limits>

#include "pidalign/simd/kernels.hpp"

namespace pidalign::simd {
namespace {

double logsumexp_offset(const double* x, const double* offset, std::size_t n) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) hi = std::fmax(hi, x[j] + offset[j]);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::exp(x[j] + offset[j] - hi);
  return hi + std::log(sum);
}

void exp_offset(const double* x, double shift, const double* offset, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = std::exp(x[j] + shift + offset[j]);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += x[j] * y[j];
  return s;
}

double min_sq_distance(double px, double py, double pz, const double* xs, const double* ys, const double* zs,
                       std::size_t n) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px - xs[i];
    const double dy = py - ys[i];
    const double dz = pz - zs[i];
    const double d = dx * dx + dy * dy + dz * dz;
    if (d < best) best = d;
  }
  return best;
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet set{"scalar", logsumexp_offset, exp_offset, axpy, dot, min_sq_distance};
  return set;
}

}  // namespace pidalign::simd
