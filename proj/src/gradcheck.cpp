#include "fineco/gradcheck.hpp"

#include <cmath>

namespace fineco {

GradCheckReport finite_diff_check(const std::function<Tensor()>& forward,
                                  std::span<const std::pair<std::string, Tensor*>> params,
                                  double tolerance, double step_size) {
  GradCheckReport report;
  report.tolerance = tolerance;

  // Analytic pass: one taped forward/backward, gradients copied out before
  // the finite-difference evaluations disturb anything.
  std::vector<std::vector<double>> analytic;
  {
    GradientTape tape;
    Tensor loss = forward();
    tape.backward(loss);
    analytic.reserve(params.size());
    for (const auto& [name, p] : params) {
      p->ensure_grad();
      analytic.push_back(*p->grad);
    }
  }

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto& [name, p] = params[pi];
    GradCheckEntry entry{name, 0.0};
    std::vector<double>& values = *p->data;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      double plus, minus;
      {
        NoGradGuard no_grad;
        values[i] = saved + step_size;
        plus = forward().value();
        values[i] = saved - step_size;
        minus = forward().value();
        values[i] = saved;
      }
      const double numeric = (plus - minus) / (2.0 * step_size);
      const double a = analytic[pi][i];
      const double denom = std::max({1.0, std::fabs(a), std::fabs(numeric)});
      entry.max_rel_err = std::max(entry.max_rel_err, std::fabs(a - numeric) / denom);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_param.push_back(std::move(entry));
  }
  report.passed = report.max_rel_err < tolerance;
  return report;
}

}  // namespace fineco
