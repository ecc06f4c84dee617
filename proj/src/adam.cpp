#include "fineco/adam.hpp"

#include <cmath>
#include <string>

#include "fineco/errors.hpp"
#include "fineco/kernels.hpp"

namespace fineco {

void AdamState::init(std::span<Tensor* const> params) {
  step = 0;
  m.clear();
  v.clear();
  m.reserve(params.size());
  v.reserve(params.size());
  for (const Tensor* p : params) {
    m.emplace_back(p->numel(), 0.0);
    v.emplace_back(p->numel(), 0.0);
  }
}

void adam_step(AdamState& state, std::span<Tensor* const> params) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("adam_step: state holds " + std::to_string(state.m.size()) +
                                " moment blocks for " + std::to_string(params.size()) +
                                " parameters");
  state.step += 1;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (state.m[i].size() != p.numel())
      throw std::invalid_argument("adam_step: moment shape mismatch at parameter " +
                                  std::to_string(i) + " (" + std::to_string(state.m[i].size()) +
                                  " vs " + std::to_string(p.numel()) + ")");
    if (!p.tracked())
      throw std::invalid_argument("adam_step: parameter " + std::to_string(i) +
                                  " has no gradient buffer");
    kern::adam_update(p.data->data(), state.m[i].data(), state.v[i].data(), p.grad->data(),
                      p.numel(), state.lr, state.beta1, state.beta2, state.epsilon, bias1, bias2);
  }
}

}  // namespace fineco
