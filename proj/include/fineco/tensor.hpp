#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fineco {

// Dense row-major tensor of doubles with value semantics over shared
// buffers: copies alias the same data, so the backward closures recorded on
// a tape can capture their operands cheaply. The gradient buffer exists only
// for tracked tensors and is accumulated additively during backward.
struct Tensor {
  std::vector<int> shape;
  std::shared_ptr<std::vector<double>> data;
  std::shared_ptr<std::vector<double>> grad;
  bool requires_grad = false;

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  std::size_t numel() const noexcept;
  int rank() const noexcept { return static_cast<int>(shape.size()); }
  int rows() const;  // rank-2 only
  int cols() const;  // rank-2 only

  double value() const;          // extract a scalar (numel == 1)
  double at(int i) const;        // rank-1 element
  double at(int i, int j) const; // rank-2 element

  bool tracked() const noexcept { return grad != nullptr; }
  void ensure_grad();  // allocate a zeroed gradient buffer
};

std::string shape_string(const std::vector<int>& shape);
std::size_t shape_numel(const std::vector<int>& shape);

// Ordered record of the differentiable ops executed while the tape was
// active on the current thread. backward() zeroes every gradient buffer the
// record touches, seeds d(loss)/d(loss) = 1 and replays the record in
// reverse exactly once; a tape cannot be replayed twice. One tape may be
// active per thread; independent tapes on different threads do not interact.
class GradientTape {
 public:
  GradientTape();
  ~GradientTape();
  GradientTape(const GradientTape&) = delete;
  GradientTape& operator=(const GradientTape&) = delete;

  static GradientTape* active() noexcept;
  static bool recording() noexcept;  // a tape is active and grads are enabled

  // Registers one executed op. `involved` lists every tensor whose gradient
  // the closure may touch (inputs and output); their buffers are zeroed at
  // the start of backward so accumulation always starts from zero.
  void record(const std::vector<Tensor>& involved, std::function<void()> backward_fn);

  void backward(const Tensor& loss);
  std::size_t size() const noexcept { return records_.size(); }

 private:
  struct Record {
    std::vector<std::shared_ptr<std::vector<double>>> grads;
    std::function<void()> fn;
  };
  std::vector<Record> records_;
  bool used_ = false;
};

// Disables recording for the enclosed scope; forward math is unaffected.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

}  // namespace fineco
