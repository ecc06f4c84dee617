#include <doctest.h>

#include <cmath>
#include <vector>

#include "fineco/adam.hpp"
#include "fineco/kernels.hpp"
#include "fineco/rng.hpp"
#include "fineco/tensor.hpp"

using namespace fineco;
namespace kd = fineco::kern::detail;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Restores the dispatch state even when a CHECK fails mid-test.
struct IsaGuard {
  kern::Isa saved = kern::active_isa();
  ~IsaGuard() { kern::force_isa(saved); }
};

}  // namespace

TEST_CASE("kernel dispatch reports and honors the forced variant") {
  IsaGuard guard;
  kern::force_isa(kern::Isa::scalar);
  CHECK(kern::active_isa() == kern::Isa::scalar);
  kern::force_isa(kern::preferred_isa());
  CHECK(kern::active_isa() == kern::preferred_isa());
  CHECK(std::string(kern::isa_name(kern::Isa::scalar)) == "scalar");
  CHECK(std::string(kern::isa_name(kern::Isa::avx2)) == "avx2");
}

TEST_CASE("reduction kernels match closed-form values") {
  IsaGuard guard;
  for (kern::Isa isa : {kern::Isa::scalar, kern::preferred_isa()}) {
    kern::force_isa(isa);
    // 1 + 2 + ... + 100 is exactly representable, so the interleaved
    // accumulators must land on it without rounding.
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
    CHECK(kern::sum(x.data(), x.size()) == 5050.0);
    CHECK(kern::max_value(x.data(), x.size()) == 100.0);

    std::vector<double> e(100, 0.0);
    e[37] = 1.0;
    CHECK(kern::dot(x.data(), e.data(), x.size()) == 38.0);
    CHECK(kern::sum(x.data(), 0) == 0.0);
    CHECK(kern::max_value(x.data(), 1) == 1.0);
  }
}

TEST_CASE("elementwise kernels match per-element arithmetic") {
  Rng rng(11);
  const std::size_t n = 53;
  const std::vector<double> a = random_vec(rng, n);
  const std::vector<double> b = random_vec(rng, n);
  std::vector<double> out(n);

  kern::add(a.data(), b.data(), out.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] + b[i]);
  kern::sub(a.data(), b.data(), out.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] - b[i]);
  kern::mul(a.data(), b.data(), out.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] * b[i]);
  kern::scale(a.data(), 1.75, out.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] * 1.75);

  std::vector<double> y = b;
  kern::axpy(0.5, a.data(), y.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == std::fma(0.5, a[i], b[i]));
}

TEST_CASE("scalar and AVX2 variants are bit-identical on every size 0..67") {
  const kern::detail::KernelTable* scalar = kd::scalar_table();
  const kern::detail::KernelTable* avx2 = kd::avx2_table();
  if (avx2 == nullptr) {
    MESSAGE("AVX2 variant not available on this build; equivalence vacuously holds");
    return;
  }
  Rng rng(29);
  for (std::size_t n = 0; n <= 67; ++n) {
    // Offset by one so nothing relies on 32-byte alignment of the base.
    std::vector<double> abuf = random_vec(rng, n + 1), bbuf = random_vec(rng, n + 1);
    const double* a = abuf.data() + 1;
    const double* b = bbuf.data() + 1;

    if (n >= 1) {
      CHECK(scalar->sum(a, n) == avx2->sum(a, n));
      CHECK(scalar->dot(a, b, n) == avx2->dot(a, b, n));
      CHECK(scalar->max_value(a, n) == avx2->max_value(a, n));
    } else {
      CHECK(scalar->sum(a, 0) == avx2->sum(a, 0));
      CHECK(scalar->dot(a, b, 0) == avx2->dot(a, b, 0));
    }

    std::vector<double> out_s(n), out_v(n);
    scalar->add(a, b, out_s.data(), n);
    avx2->add(a, b, out_v.data(), n);
    CHECK(out_s == out_v);
    scalar->sub(a, b, out_s.data(), n);
    avx2->sub(a, b, out_v.data(), n);
    CHECK(out_s == out_v);
    scalar->mul(a, b, out_s.data(), n);
    avx2->mul(a, b, out_v.data(), n);
    CHECK(out_s == out_v);
    scalar->scale(a, -0.37, out_s.data(), n);
    avx2->scale(a, -0.37, out_v.data(), n);
    CHECK(out_s == out_v);

    std::vector<double> y_s(b, b + n), y_v(b, b + n);
    scalar->axpy(1.25, a, y_s.data(), n);
    avx2->axpy(1.25, a, y_v.data(), n);
    CHECK(y_s == y_v);

    std::vector<double> p_s(a, a + n), p_v(a, a + n);
    std::vector<double> m_s = random_vec(rng, n, -0.1, 0.1), m_v = m_s;
    std::vector<double> v_s = random_vec(rng, n, 0.0, 0.1), v_v = v_s;
    const std::vector<double> g = random_vec(rng, n);
    scalar->adam_update(p_s.data(), m_s.data(), v_s.data(), g.data(), n, 1e-3, 0.9, 0.999, 1e-8,
                        0.1, 0.001);
    avx2->adam_update(p_v.data(), m_v.data(), v_v.data(), g.data(), n, 1e-3, 0.9, 0.999, 1e-8, 0.1,
                      0.001);
    CHECK(p_s == p_v);
    CHECK(m_s == m_v);
    CHECK(v_s == v_v);
  }
}

TEST_CASE("adam_update matches the formula and ignores zero gradients exactly") {
  const std::size_t n = 9;
  Rng rng(5);
  std::vector<double> p = random_vec(rng, n), m(n, 0.0), v(n, 0.0);
  const std::vector<double> p0 = p;
  const std::vector<double> g = random_vec(rng, n);
  const double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double bias1 = 1.0 - beta1, bias2 = 1.0 - beta2;  // first step

  kern::adam_update(p.data(), m.data(), v.data(), g.data(), n, lr, beta1, beta2, eps, bias1, bias2);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = (1.0 - beta1) * g[i];
    const double vi = (1.0 - beta2) * (g[i] * g[i]);
    const double want = p0[i] - lr * ((mi / bias1) / (std::sqrt(vi / bias2) + eps));
    CHECK(p[i] == doctest::Approx(want).epsilon(1e-15));
  }

  // Zero gradient on zero moments must leave the parameter bit-identical.
  std::vector<double> zp = p0, zm(n, 0.0), zv(n, 0.0), zg(n, 0.0);
  kern::adam_update(zp.data(), zm.data(), zv.data(), zg.data(), n, lr, beta1, beta2, eps, bias1,
                    bias2);
  CHECK(zp == p0);
}

TEST_CASE("first optimizer step moves a parameter by almost exactly lr") {
  // With a fresh state and gradient 0.5 the bias corrections cancel:
  // m-hat = g, v-hat = g^2, so the step is lr * g / (|g| + eps) ~ lr.
  Tensor w = Tensor::scalar(1.0, true);
  w.ensure_grad();
  (*w.grad)[0] = 0.5;
  AdamState state;
  state.lr = 1e-3;
  std::vector<Tensor*> params{&w};
  state.init(params);
  adam_step(state, params);
  CHECK(state.step == 1);
  CHECK(w.value() == doctest::Approx(1.0 - 1e-3).epsilon(1e-10));

  // A second step with zero gradient decays the moments but the parameter
  // still moves (momentum), so run it on a separate zero-moment state.
  Tensor z = Tensor::scalar(2.0, true);
  z.ensure_grad();
  AdamState zs;
  std::vector<Tensor*> zparams{&z};
  zs.init(zparams);
  adam_step(zs, zparams);
  CHECK(z.value() == 2.0);
}

TEST_CASE("adam_step applies the same math through tensors as the raw kernel") {
  Rng rng(17);
  const std::size_t n = 12;
  std::vector<double> values = random_vec(rng, n), grads = random_vec(rng, n);
  Tensor w = Tensor::from_values({3, 4}, values, true);
  w.ensure_grad();
  *w.grad = grads;

  AdamState state;
  state.lr = 2e-3;
  std::vector<Tensor*> params{&w};
  state.init(params);
  adam_step(state, params);
  adam_step(state, params);  // second step exercises the bias corrections

  std::vector<double> p = values, m(n, 0.0), v(n, 0.0);
  for (int step = 1; step <= 2; ++step) {
    const double bias1 = 1.0 - std::pow(state.beta1, step);
    const double bias2 = 1.0 - std::pow(state.beta2, step);
    kern::adam_update(p.data(), m.data(), v.data(), grads.data(), n, state.lr, state.beta1,
                      state.beta2, state.epsilon, bias1, bias2);
  }
  for (std::size_t i = 0; i < n; ++i) CHECK((*w.data)[i] == doctest::Approx(p[i]).epsilon(1e-14));
}
