#include "fineco/kernels.hpp"

#include <cmath>

// Reference kernels. These define the numeric contract: the AVX2 variants in
// kernels_avx2.cpp must reproduce these results bit for bit, which is why the
// reductions below keep four interleaved accumulators instead of one running
// sum — that is exactly the order a 256-bit lane-wise loop accumulates in.

namespace fineco::kern::detail {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lane[i & 3] += x[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lane[i & 3] = std::fma(x[i], y[i], lane[i & 3]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double max_value_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(const double* x, double c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * c;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void adam_update_scalar(double* param, double* m, double* v, const double* grad,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bias1, double bias2) {
  const double omb1 = 1.0 - beta1;
  const double omb2 = 1.0 - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    // Two rounded products then a rounded add, matching the vector sequence
    // mul/mul/add (no fma here, the AVX2 path does not fuse these either).
    const double m1 = beta1 * m[i];
    const double m2 = omb1 * g;
    m[i] = m1 + m2;
    const double v1 = beta2 * v[i];
    const double v2 = omb2 * (g * g);
    v[i] = v1 + v2;
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    param[i] = param[i] - lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

constexpr KernelTable kScalarTable = {
    sum_scalar,  dot_scalar,   max_value_scalar, add_scalar,        sub_scalar,
    mul_scalar,  scale_scalar, axpy_scalar,      adam_update_scalar};

}  // namespace

const KernelTable* scalar_table() noexcept { return &kScalarTable; }

}  // namespace fineco::kern::detail
