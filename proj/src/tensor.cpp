#include "fineco/tensor.hpp"

#include <cstring>
#include <sstream>

#include "fineco/errors.hpp"

namespace fineco {
namespace {

thread_local GradientTape* t_active_tape = nullptr;
thread_local int t_no_grad_depth = 0;

}  // namespace

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  for (int d : shape)
    if (d < 0) throw std::invalid_argument("Tensor: negative dimension in " + shape_string(shape));
  Tensor t;
  t.data = std::make_shared<std::vector<double>>(shape_numel(shape), 0.0);
  t.shape = std::move(shape);
  if (requires_grad) {
    t.requires_grad = true;
    t.ensure_grad();
  }
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  for (double& x : *t.data) x = value;
  return t;
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values,
                           bool requires_grad) {
  if (shape_numel(shape) != values.size())
    throw std::invalid_argument("Tensor: " + std::to_string(values.size()) +
                                " values do not fill shape " + shape_string(shape));
  Tensor t;
  t.shape = std::move(shape);
  t.data = std::make_shared<std::vector<double>>(std::move(values));
  if (requires_grad) {
    t.requires_grad = true;
    t.ensure_grad();
  }
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({1}, {value}, requires_grad);
}

std::size_t Tensor::numel() const noexcept { return data ? data->size() : 0; }

int Tensor::rows() const {
  if (rank() != 2) throw std::invalid_argument("Tensor::rows: rank-2 expected, got " + shape_string(shape));
  return shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw std::invalid_argument("Tensor::cols: rank-2 expected, got " + shape_string(shape));
  return shape[1];
}

double Tensor::value() const {
  if (numel() != 1)
    throw std::invalid_argument("Tensor::value: scalar expected, got " + shape_string(shape));
  return (*data)[0];
}

double Tensor::at(int i) const {
  return (*data)[static_cast<std::size_t>(i)];
}

double Tensor::at(int i, int j) const {
  return (*data)[static_cast<std::size_t>(i) * static_cast<std::size_t>(shape[1]) +
                 static_cast<std::size_t>(j)];
}

void Tensor::ensure_grad() {
  if (!grad) grad = std::make_shared<std::vector<double>>(numel(), 0.0);
}

GradientTape::GradientTape() {
  if (t_active_tape != nullptr)
    throw std::logic_error("GradientTape: another tape is already active on this thread");
  t_active_tape = this;
}

GradientTape::~GradientTape() { t_active_tape = nullptr; }

GradientTape* GradientTape::active() noexcept { return t_active_tape; }

bool GradientTape::recording() noexcept {
  return t_active_tape != nullptr && t_no_grad_depth == 0;
}

void GradientTape::record(const std::vector<Tensor>& involved, std::function<void()> backward_fn) {
  Record rec;
  rec.grads.reserve(involved.size());
  for (const Tensor& t : involved)
    if (t.grad) rec.grads.push_back(t.grad);
  rec.fn = std::move(backward_fn);
  records_.push_back(std::move(rec));
}

void GradientTape::backward(const Tensor& loss) {
  if (used_) throw std::logic_error("GradientTape::backward: tape already replayed");
  if (loss.numel() != 1)
    throw NumericError("backward: loss must be scalar, got " + shape_string(loss.shape));
  if (!loss.tracked())
    throw NumericError("backward: loss was not recorded on a tape");
  used_ = true;
  for (const Record& rec : records_)
    for (const auto& g : rec.grads) std::memset(g->data(), 0, g->size() * sizeof(double));
  (*loss.grad)[0] = 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->fn();
}

NoGradGuard::NoGradGuard() { ++t_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --t_no_grad_depth; }

}  // namespace fineco
