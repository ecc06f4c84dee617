#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fineco/tensor.hpp"

namespace fineco {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_param;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Compares tape gradients against central finite differences. `forward` must
// rebuild the computation from the current parameter values and return a
// scalar; it is called once under a tape for the analytic gradients and then
// twice per parameter element with that element nudged by ±step_size.
// Relative error is |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckReport finite_diff_check(const std::function<Tensor()>& forward,
                                  std::span<const std::pair<std::string, Tensor*>> params,
                                  double tolerance, double step_size = 1e-3);

}  // namespace fineco
