#include "fineco/ops.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "fineco/errors.hpp"
#include "fineco/kernels.hpp"

namespace fineco {
namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape != b.shape)
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a.shape) +
                                " vs " + shape_string(b.shape));
}

void check_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2)
    throw std::invalid_argument(std::string(op) + ": rank-2 tensor expected, got " +
                                shape_string(a.shape));
}

bool should_track(std::initializer_list<const Tensor*> inputs) {
  if (!GradientTape::recording()) return false;
  for (const Tensor* t : inputs)
    if (t->tracked()) return true;
  return false;
}

Tensor tracked_output(std::vector<int> shape) {
  Tensor out = Tensor::zeros(std::move(shape));
  out.requires_grad = true;
  out.ensure_grad();
  return out;
}

// Applies y = f(x) elementwise and records gx += g * dfdy(x, y).
template <typename Fwd, typename Bwd>
Tensor unary_elementwise(const Tensor& a, Fwd fwd, Bwd bwd) {
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  const std::size_t n = a.numel();
  const double* x = a.data->data();
  double* y = out.data->data();
  for (std::size_t i = 0; i < n; ++i) y[i] = fwd(x[i]);
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, bwd] {
      const std::size_t n = a.numel();
      const double* g = out.grad->data();
      const double* x = a.data->data();
      const double* y = out.data->data();
      double* gx = a.grad->data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * bwd(x[i], y[i]);
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  const bool track = should_track({&a, &b});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  kern::add(a.data->data(), b.data->data(), out.data->data(), out.numel());
  if (track) {
    GradientTape::active()->record({a, b, out}, [a, b, out] {
      const double* g = out.grad->data();
      if (a.tracked()) kern::axpy(1.0, g, a.grad->data(), out.numel());
      if (b.tracked()) kern::axpy(1.0, g, b.grad->data(), out.numel());
    });
  }
  return out;
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  check_rank2(a, "add_rowvec");
  if (v.rank() != 1 || v.shape[0] != a.shape[1])
    throw std::invalid_argument("add_rowvec: shape mismatch " + shape_string(a.shape) + " vs " +
                                shape_string(v.shape));
  const int m = a.shape[0], n = a.shape[1];
  const bool track = should_track({&a, &v});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  for (int i = 0; i < m; ++i)
    kern::add(a.data->data() + static_cast<std::size_t>(i) * n, v.data->data(),
              out.data->data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n));
  if (track) {
    GradientTape::active()->record({a, v, out}, [a, v, out, m, n] {
      const double* g = out.grad->data();
      if (a.tracked()) kern::axpy(1.0, g, a.grad->data(), out.numel());
      if (v.tracked())
        for (int i = 0; i < m; ++i)
          kern::axpy(1.0, g + static_cast<std::size_t>(i) * n, v.grad->data(),
                     static_cast<std::size_t>(n));
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  const bool track = should_track({&a, &b});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  kern::sub(a.data->data(), b.data->data(), out.data->data(), out.numel());
  if (track) {
    GradientTape::active()->record({a, b, out}, [a, b, out] {
      const double* g = out.grad->data();
      if (a.tracked()) kern::axpy(1.0, g, a.grad->data(), out.numel());
      if (b.tracked()) kern::axpy(-1.0, g, b.grad->data(), out.numel());
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  const bool track = should_track({&a, &b});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  kern::mul(a.data->data(), b.data->data(), out.data->data(), out.numel());
  if (track) {
    GradientTape::active()->record({a, b, out}, [a, b, out] {
      const std::size_t n = out.numel();
      const double* g = out.grad->data();
      if (a.tracked()) {
        const double* bv = b.data->data();
        double* ga = a.grad->data();
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
      }
      if (b.tracked()) {
        const double* av = a.data->data();
        double* gb = b.grad->data();
        for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double c) {
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  kern::scale(a.data->data(), c, out.data->data(), out.numel());
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, c] {
      kern::axpy(c, out.grad->data(), a.grad->data(), out.numel());
    });
  }
  return out;
}

Tensor exp(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  const double* x = a.data->data();
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (!(x[i] > 0.0))
      throw NumericError("log: non-positive input " + std::to_string(x[i]) + " at index " +
                         std::to_string(i));
  return unary_elementwise(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0])
    throw std::invalid_argument("matmul: incompatible shapes " + shape_string(a.shape) + " and " +
                                shape_string(b.shape));
  const int m = a.shape[0], k = a.shape[1], n = b.shape[1];
  const bool track = should_track({&a, &b});
  Tensor out = track ? tracked_output({m, n}) : Tensor::zeros({m, n});
  const double* A = a.data->data();
  const double* B = b.data->data();
  double* O = out.data->data();
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p)
      kern::axpy(A[static_cast<std::size_t>(i) * k + p], B + static_cast<std::size_t>(p) * n,
                 O + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n));
  if (track) {
    GradientTape::active()->record({a, b, out}, [a, b, out, m, k, n] {
      const double* G = out.grad->data();
      const double* A = a.data->data();
      const double* B = b.data->data();
      if (a.tracked()) {
        double* ga = a.grad->data();
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p)
            ga[static_cast<std::size_t>(i) * k + p] +=
                kern::dot(G + static_cast<std::size_t>(i) * n,
                          B + static_cast<std::size_t>(p) * n, static_cast<std::size_t>(n));
      }
      if (b.tracked()) {
        double* gb = b.grad->data();
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p)
            kern::axpy(A[static_cast<std::size_t>(i) * k + p],
                       G + static_cast<std::size_t>(i) * n,
                       gb + static_cast<std::size_t>(p) * n, static_cast<std::size_t>(n));
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  check_rank2(a, "transpose");
  const int m = a.shape[0], n = a.shape[1];
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output({n, m}) : Tensor::zeros({n, m});
  const double* x = a.data->data();
  double* y = out.data->data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      y[static_cast<std::size_t>(j) * m + i] = x[static_cast<std::size_t>(i) * n + j];
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, m, n] {
      const double* g = out.grad->data();
      double* ga = a.grad->data();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          ga[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(j) * m + i];
    });
  }
  return out;
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  if (shape_numel(shape) != a.numel())
    throw std::invalid_argument("reshape: cannot view " + shape_string(a.shape) + " as " +
                                shape_string(shape));
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output(shape) : Tensor::zeros(shape);
  std::memcpy(out.data->data(), a.data->data(), a.numel() * sizeof(double));
  if (track) {
    GradientTape::active()->record({a, out}, [a, out] {
      kern::axpy(1.0, out.grad->data(), a.grad->data(), out.numel());
    });
  }
  return out;
}

namespace {

// Softmax over the rows of a rank-2 tensor; the rank-1 case is a single row.
Tensor softmax_rows(const Tensor& a, int m, int n) {
  const double* x = a.data->data();
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (std::isnan(x[i])) throw NumericError("softmax: NaN input at index " + std::to_string(i));
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  double* y = out.data->data();
  std::vector<double> tmp(static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    const double* row = x + static_cast<std::size_t>(i) * n;
    double* yrow = y + static_cast<std::size_t>(i) * n;
    const double mx = kern::max_value(row, static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) tmp[static_cast<std::size_t>(j)] = std::exp(row[j] - mx);
    const double s = kern::sum(tmp.data(), static_cast<std::size_t>(n));
    kern::scale(tmp.data(), 1.0 / s, yrow, static_cast<std::size_t>(n));
  }
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, m, n] {
      const double* g = out.grad->data();
      const double* y = out.data->data();
      double* ga = a.grad->data();
      for (int i = 0; i < m; ++i) {
        const double* grow = g + static_cast<std::size_t>(i) * n;
        const double* yrow = y + static_cast<std::size_t>(i) * n;
        double* garow = ga + static_cast<std::size_t>(i) * n;
        const double dotgy = kern::dot(grow, yrow, static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) garow[j] += yrow[j] * (grow[j] - dotgy);
      }
    });
  }
  return out;
}

}  // namespace

Tensor softmax(const Tensor& a, int axis) {
  if (a.rank() == 1) {
    if (axis != -1 && axis != 0)
      throw std::invalid_argument("softmax: axis " + std::to_string(axis) + " out of range for " +
                                  shape_string(a.shape));
    return softmax_rows(a, 1, a.shape[0]);
  }
  if (a.rank() == 2) {
    if (axis == -1) axis = 1;
    if (axis == 1) return softmax_rows(a, a.shape[0], a.shape[1]);
    if (axis == 0) return transpose(softmax_rows(transpose(a), a.shape[1], a.shape[0]));
    throw std::invalid_argument("softmax: axis " + std::to_string(axis) + " out of range for " +
                                shape_string(a.shape));
  }
  throw std::invalid_argument("softmax: rank-1 or rank-2 tensor expected, got " +
                              shape_string(a.shape));
}

Tensor logsumexp_rows(const Tensor& a) {
  check_rank2(a, "logsumexp_rows");
  const int m = a.shape[0], n = a.shape[1];
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output({m}) : Tensor::zeros({m});
  const double* x = a.data->data();
  double* y = out.data->data();
  // Normalized exponentials double as the backward weights.
  auto probs = std::make_shared<std::vector<double>>(a.numel());
  for (int i = 0; i < m; ++i) {
    const double* row = x + static_cast<std::size_t>(i) * n;
    double* prow = probs->data() + static_cast<std::size_t>(i) * n;
    const double mx = kern::max_value(row, static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) prow[j] = std::exp(row[j] - mx);
    const double s = kern::sum(prow, static_cast<std::size_t>(n));
    y[i] = mx + std::log(s);
    kern::scale(prow, 1.0 / s, prow, static_cast<std::size_t>(n));
  }
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, probs, m, n] {
      const double* g = out.grad->data();
      double* ga = a.grad->data();
      for (int i = 0; i < m; ++i)
        kern::axpy(g[i], probs->data() + static_cast<std::size_t>(i) * n,
                   ga + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n));
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output({1}) : Tensor::zeros({1});
  (*out.data)[0] = kern::sum(a.data->data(), a.numel());
  if (track) {
    GradientTape::active()->record({a, out}, [a, out] {
      const double g = (*out.grad)[0];
      double* ga = a.grad->data();
      for (std::size_t i = 0; i < a.numel(); ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor mean_rows(const Tensor& a) {
  check_rank2(a, "mean_rows");
  const int m = a.shape[0], n = a.shape[1];
  if (m == 0) throw std::invalid_argument("mean_rows: zero rows in " + shape_string(a.shape));
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output({n}) : Tensor::zeros({n});
  const double* x = a.data->data();
  double* y = out.data->data();
  for (int i = 0; i < m; ++i)
    kern::axpy(1.0, x + static_cast<std::size_t>(i) * n, y, static_cast<std::size_t>(n));
  kern::scale(y, 1.0 / m, y, static_cast<std::size_t>(n));
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, m, n] {
      const double* g = out.grad->data();
      double* ga = a.grad->data();
      for (int i = 0; i < m; ++i)
        kern::axpy(1.0 / m, g, ga + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n));
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  check_rank2(table, "gather_rows");
  const int V = table.shape[0], d = table.shape[1];
  std::vector<int> idx(ids.begin(), ids.end());
  for (int id : idx)
    if (id < 0 || id >= V)
      throw std::out_of_range("gather_rows: id " + std::to_string(id) + " outside table " +
                              shape_string(table.shape));
  const int m = static_cast<int>(idx.size());
  const bool track = should_track({&table});
  Tensor out = track ? tracked_output({m, d}) : Tensor::zeros({m, d});
  const double* x = table.data->data();
  double* y = out.data->data();
  for (int r = 0; r < m; ++r)
    std::memcpy(y + static_cast<std::size_t>(r) * d,
                x + static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]) * d,
                static_cast<std::size_t>(d) * sizeof(double));
  if (track) {
    GradientTape::active()->record({table, out}, [table, out, idx = std::move(idx), d] {
      const double* g = out.grad->data();
      double* gt = table.grad->data();
      for (std::size_t r = 0; r < idx.size(); ++r)
        kern::axpy(1.0, g + r * static_cast<std::size_t>(d),
                   gt + static_cast<std::size_t>(idx[r]) * d, static_cast<std::size_t>(d));
    });
  }
  return out;
}

Tensor gather(const Tensor& v, std::span<const int> indices) {
  if (v.rank() != 1)
    throw std::invalid_argument("gather: rank-1 tensor expected, got " + shape_string(v.shape));
  std::vector<int> idx(indices.begin(), indices.end());
  for (int i : idx)
    if (i < 0 || i >= v.shape[0])
      throw std::out_of_range("gather: index " + std::to_string(i) + " outside " +
                              shape_string(v.shape));
  const int m = static_cast<int>(idx.size());
  const bool track = should_track({&v});
  Tensor out = track ? tracked_output({m}) : Tensor::zeros({m});
  for (int r = 0; r < m; ++r)
    (*out.data)[static_cast<std::size_t>(r)] = v.at(idx[static_cast<std::size_t>(r)]);
  if (track) {
    GradientTape::active()->record({v, out}, [v, out, idx = std::move(idx)] {
      const double* g = out.grad->data();
      double* gv = v.grad->data();
      for (std::size_t r = 0; r < idx.size(); ++r) gv[static_cast<std::size_t>(idx[r])] += g[r];
    });
  }
  return out;
}

Tensor diag(const Tensor& a) {
  check_rank2(a, "diag");
  if (a.shape[0] != a.shape[1])
    throw std::invalid_argument("diag: square matrix expected, got " + shape_string(a.shape));
  const int n = a.shape[0];
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output({n}) : Tensor::zeros({n});
  for (int i = 0; i < n; ++i) (*out.data)[static_cast<std::size_t>(i)] = a.at(i, i);
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, n] {
      const double* g = out.grad->data();
      double* ga = a.grad->data();
      for (int i = 0; i < n; ++i) ga[static_cast<std::size_t>(i) * n + i] += g[i];
    });
  }
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  check_rank2(a, "concat_cols");
  check_rank2(b, "concat_cols");
  if (a.shape[0] != b.shape[0])
    throw std::invalid_argument("concat_cols: row mismatch " + shape_string(a.shape) + " vs " +
                                shape_string(b.shape));
  const int m = a.shape[0], p = a.shape[1], q = b.shape[1];
  const bool track = should_track({&a, &b});
  Tensor out = track ? tracked_output({m, p + q}) : Tensor::zeros({m, p + q});
  double* y = out.data->data();
  for (int i = 0; i < m; ++i) {
    std::memcpy(y + static_cast<std::size_t>(i) * (p + q),
                a.data->data() + static_cast<std::size_t>(i) * p,
                static_cast<std::size_t>(p) * sizeof(double));
    std::memcpy(y + static_cast<std::size_t>(i) * (p + q) + p,
                b.data->data() + static_cast<std::size_t>(i) * q,
                static_cast<std::size_t>(q) * sizeof(double));
  }
  if (track) {
    GradientTape::active()->record({a, b, out}, [a, b, out, m, p, q] {
      const double* g = out.grad->data();
      for (int i = 0; i < m; ++i) {
        if (a.tracked())
          kern::axpy(1.0, g + static_cast<std::size_t>(i) * (p + q),
                     a.grad->data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p));
        if (b.tracked())
          kern::axpy(1.0, g + static_cast<std::size_t>(i) * (p + q) + p,
                     b.grad->data() + static_cast<std::size_t>(i) * q, static_cast<std::size_t>(q));
      }
    });
  }
  return out;
}

Tensor tile_rows(const Tensor& v, int m) {
  if (v.rank() != 1)
    throw std::invalid_argument("tile_rows: rank-1 tensor expected, got " + shape_string(v.shape));
  if (m < 1) throw std::invalid_argument("tile_rows: row count must be positive");
  const int n = v.shape[0];
  const bool track = should_track({&v});
  Tensor out = track ? tracked_output({m, n}) : Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    std::memcpy(out.data->data() + static_cast<std::size_t>(i) * n, v.data->data(),
                static_cast<std::size_t>(n) * sizeof(double));
  if (track) {
    GradientTape::active()->record({v, out}, [v, out, m, n] {
      const double* g = out.grad->data();
      for (int i = 0; i < m; ++i)
        kern::axpy(1.0, g + static_cast<std::size_t>(i) * n, v.grad->data(),
                   static_cast<std::size_t>(n));
    });
  }
  return out;
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no rows given");
  const int n = rows[0].rank() == 1
                    ? rows[0].shape[0]
                    : throw std::invalid_argument("stack_rows: rank-1 rows expected, got " +
                                                  shape_string(rows[0].shape));
  std::vector<Tensor> parts(rows.begin(), rows.end());
  for (const Tensor& r : parts)
    if (r.rank() != 1 || r.shape[0] != n)
      throw std::invalid_argument("stack_rows: row shape mismatch [" + std::to_string(n) +
                                  "] vs " + shape_string(r.shape));
  const int m = static_cast<int>(parts.size());
  bool any_tracked = false;
  for (const Tensor& r : parts) any_tracked |= r.tracked();
  const bool track = GradientTape::recording() && any_tracked;
  Tensor out = track ? tracked_output({m, n}) : Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    std::memcpy(out.data->data() + static_cast<std::size_t>(i) * n,
                parts[static_cast<std::size_t>(i)].data->data(),
                static_cast<std::size_t>(n) * sizeof(double));
  if (track) {
    std::vector<Tensor> involved = parts;
    involved.push_back(out);
    GradientTape::active()->record(involved, [parts = std::move(parts), out, n] {
      const double* g = out.grad->data();
      for (std::size_t i = 0; i < parts.size(); ++i)
        if (parts[i].tracked())
          kern::axpy(1.0, g + i * static_cast<std::size_t>(n), parts[i].grad->data(),
                     static_cast<std::size_t>(n));
    });
  }
  return out;
}

Tensor normalize_rows(const Tensor& a) {
  if (a.rank() != 1 && a.rank() != 2)
    throw std::invalid_argument("normalize_rows: rank-1 or rank-2 tensor expected, got " +
                                shape_string(a.shape));
  const int m = a.rank() == 2 ? a.shape[0] : 1;
  const int n = a.rank() == 2 ? a.shape[1] : a.shape[0];
  if (n == 0) throw std::invalid_argument("normalize_rows: zero columns in " + shape_string(a.shape));
  constexpr double kEps = 1e-12;  // keeps the zero vector at zero instead of NaN
  const bool track = should_track({&a});
  Tensor out = track ? tracked_output(a.shape) : Tensor::zeros(a.shape);
  const double* x = a.data->data();
  double* y = out.data->data();
  for (int i = 0; i < m; ++i) {
    const double* row = x + static_cast<std::size_t>(i) * n;
    const double r = 1.0 / std::sqrt(kern::dot(row, row, static_cast<std::size_t>(n)) + kEps);
    kern::scale(row, r, y + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n));
  }
  if (track) {
    GradientTape::active()->record({a, out}, [a, out, m, n] {
      const double* g = out.grad->data();
      const double* x = a.data->data();
      double* ga = a.grad->data();
      for (int i = 0; i < m; ++i) {
        const double* row = x + static_cast<std::size_t>(i) * n;
        const double* grow = g + static_cast<std::size_t>(i) * n;
        double* garow = ga + static_cast<std::size_t>(i) * n;
        const double sq = kern::dot(row, row, static_cast<std::size_t>(n)) + kEps;
        const double r = 1.0 / std::sqrt(sq);
        const double r3gx = kern::dot(grow, row, static_cast<std::size_t>(n)) * r * r * r;
        for (int j = 0; j < n; ++j) garow[j] += r * grow[j] - r3gx * row[j];
      }
    });
  }
  return out;
}

Tensor detach(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape);
  std::memcpy(out.data->data(), a.data->data(), a.numel() * sizeof(double));
  return out;
}

}  // namespace fineco
