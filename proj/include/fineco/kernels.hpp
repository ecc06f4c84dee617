#pragma once

#include <cstddef>

// Data-parallel inner loops behind the tensor layer. Each routine has a
// scalar reference implementation and an AVX2 variant picked at runtime
// after a CPUID check (override with force_isa() or FINECO_KERNELS=scalar).
//
// Reductions are defined over four interleaved partial accumulators: element
// i feeds accumulator i mod 4 and the lanes combine as (l0+l1)+(l2+l3).
// The scalar path uses std::fma wherever the vector path uses fused ops, and
// +,-,*,/,sqrt are correctly rounded either way, so every variant returns
// bit-identical results. Equivalence tests assert exact equality.

namespace fineco::kern {

enum class Isa { scalar, avx2 };

Isa preferred_isa() noexcept;           // best variant this CPU supports
Isa active_isa() noexcept;              // variant currently dispatched to
void force_isa(Isa isa) noexcept;       // pin a variant (tests, debugging)
const char* isa_name(Isa isa) noexcept;

double sum(const double* x, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
double max_value(const double* x, std::size_t n) noexcept;  // requires n >= 1

void add(const double* a, const double* b, double* out, std::size_t n) noexcept;
void sub(const double* a, const double* b, double* out, std::size_t n) noexcept;
void mul(const double* a, const double* b, double* out, std::size_t n) noexcept;
void scale(const double* x, double c, double* out, std::size_t n) noexcept;
void axpy(double a, const double* x, double* y, std::size_t n) noexcept;  // y += a*x, fused

// One Adam update over a contiguous parameter block. bias1/bias2 are the
// precomputed corrections 1 - beta1^t and 1 - beta2^t.
void adam_update(double* param, double* m, double* v, const double* grad,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bias1, double bias2) noexcept;

namespace detail {

struct KernelTable {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*max_value)(const double*, std::size_t);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(const double*, double, double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*adam_update)(double*, double*, double*, const double*, std::size_t,
                      double, double, double, double, double, double);
};

const KernelTable* scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in

}  // namespace detail

}  // namespace fineco::kern
