#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fineco/tensor.hpp"

namespace fineco {

// Adam with bias correction. Moments are stored per parameter tensor in
// registration order; the step counter lives here so checkpoints can resume
// the schedule exactly. lr is the current learning rate and is expected to
// be rewritten by the schedule before each step.
struct AdamState {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(std::span<Tensor* const> params);
};

// One update over all parameters, reading each tensor's gradient buffer.
// A zero gradient applied to zero moments leaves the parameter bit-identical.
void adam_step(AdamState& state, std::span<Tensor* const> params);

}  // namespace fineco
