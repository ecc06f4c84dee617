#include "fineco/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace fineco::kern {
namespace {

using detail::KernelTable;

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_preferred() noexcept {
  if (detail::avx2_table() != nullptr && cpu_has_avx2()) return Isa::avx2;
  return Isa::scalar;
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("FINECO_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && detect_preferred() == Isa::avx2) return Isa::avx2;
  }
  return detect_preferred();
}

const KernelTable* table_for(Isa isa) noexcept {
  if (isa == Isa::avx2) {
    if (const KernelTable* t = detail::avx2_table()) return t;
  }
  return detail::scalar_table();
}

std::atomic<const KernelTable*>& active_table() noexcept {
  static std::atomic<const KernelTable*> table{table_for(initial_isa())};
  return table;
}

}  // namespace

Isa preferred_isa() noexcept { return detect_preferred(); }

Isa active_isa() noexcept {
  return active_table().load(std::memory_order_relaxed) == detail::avx2_table() ? Isa::avx2
                                                                                : Isa::scalar;
}

void force_isa(Isa isa) noexcept {
  active_table().store(table_for(isa), std::memory_order_relaxed);
}

const char* isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

double sum(const double* x, std::size_t n) noexcept {
  return active_table().load(std::memory_order_relaxed)->sum(x, n);
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
  return active_table().load(std::memory_order_relaxed)->dot(x, y, n);
}

double max_value(const double* x, std::size_t n) noexcept {
  return active_table().load(std::memory_order_relaxed)->max_value(x, n);
}

void add(const double* a, const double* b, double* out, std::size_t n) noexcept {
  active_table().load(std::memory_order_relaxed)->add(a, b, out, n);
}

void sub(const double* a, const double* b, double* out, std::size_t n) noexcept {
  active_table().load(std::memory_order_relaxed)->sub(a, b, out, n);
}

void mul(const double* a, const double* b, double* out, std::size_t n) noexcept {
  active_table().load(std::memory_order_relaxed)->mul(a, b, out, n);
}

void scale(const double* x, double c, double* out, std::size_t n) noexcept {
  active_table().load(std::memory_order_relaxed)->scale(x, c, out, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) noexcept {
  active_table().load(std::memory_order_relaxed)->axpy(a, x, y, n);
}

void adam_update(double* param, double* m, double* v, const double* grad, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double bias1,
                 double bias2) noexcept {
  active_table().load(std::memory_order_relaxed)
      ->adam_update(param, m, v, grad, n, lr, beta1, beta2, eps, bias1, bias2);
}

}  // namespace fineco::kern
