#include "pidalign/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "pidalign/simd/kernels.hpp"

namespace pidalign {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  const auto& k = simd::active_kernels();
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out = c.row(i).data();
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double s = a(i, l);
      if (s != 0.0) k.axpy(s, b.row(l).data(), out, b.cols());
    }
  }
  return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Matrix c(a.rows(), a.cols());
  auto ad = a.data();
  auto bd = b.data();
  auto cd = c.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] = ad[i] * bd[i];
  return c;
}

Matrix add_scaled(const Matrix& a, double s, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Matrix c = a;
  simd::active_kernels().axpy(s, b.data().data(), c.data().data(), c.data().size());
  return c;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  return simd::active_kernels().dot(a.data().data(), b.data().data(), a.data().size());
}

std::vector<double> row_sums(const Matrix& a) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (double v : a.row(i)) out[i] += v;
  return out;
}

std::vector<double> col_sums(const Matrix& a) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += r[j];
  }
  return out;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
  assert(a.cols() == x.size());
  const auto& k = simd::active_kernels();
  std::vector<double> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = k.dot(a.row(i).data(), x.data(), x.size());
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  double m = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) m = std::max(m, std::abs(ad[i] - bd[i]));
  return m;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace pidalign
