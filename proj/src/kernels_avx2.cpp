#include "fineco/kernels.hpp"

// AVX2 + FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it is reached exclusively through the dispatch table
// after a runtime CPU check. Each routine mirrors the scalar reference's
// four-lane accumulation order exactly, so results are bit-identical.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace fineco::kern::detail {
namespace {

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) lane[i & 3] += x[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) lane[i & 3] = std::fma(x[i], y[i], lane[i & 3]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double max_value_avx2(const double* x, std::size_t n) {
  // Running max is order-insensitive for finite inputs, so no lane protocol.
  double m = x[0];
  std::size_t i = 1;
  if (n >= 8) {
    __m256d acc = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    m = lane[0];
    for (int k = 1; k < 4; ++k)
      if (lane[k] > m) m = lane[k];
  }
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_avx2(const double* x, double c, double* out, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), cv));
  for (; i < n; ++i) out[i] = x[i] * c;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void adam_update_avx2(double* param, double* m, double* v, const double* grad,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bias1, double bias2) {
  const double omb1 = 1.0 - beta1;
  const double omb2 = 1.0 - beta2;
  const __m256d b1v = _mm256_set1_pd(beta1);
  const __m256d b2v = _mm256_set1_pd(beta2);
  const __m256d omb1v = _mm256_set1_pd(omb1);
  const __m256d omb2v = _mm256_set1_pd(omb2);
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  const __m256d bc1v = _mm256_set1_pd(bias1);
  const __m256d bc2v = _mm256_set1_pd(bias2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    // mul/mul/add, not fmadd: keeps the rounding identical to the scalar path.
    const __m256d mv =
        _mm256_add_pd(_mm256_mul_pd(b1v, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1v, g));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2v, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2v, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_div_pd(mv, bc1v);
    const __m256d vhat = _mm256_div_pd(vv, bc2v);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
    const __m256d upd = _mm256_mul_pd(lrv, _mm256_div_pd(mhat, den));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), upd));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
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

constexpr KernelTable kAvx2Table = {sum_avx2,   dot_avx2,   max_value_avx2,
                                    add_avx2,   sub_avx2,   mul_avx2,
                                    scale_avx2, axpy_avx2,  adam_update_avx2};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2Table; }

}  // namespace fineco::kern::detail

#else  // no AVX2 at compile time (non-x86 build): dispatch stays on scalar

namespace fineco::kern::detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace fineco::kern::detail

#endif
