#include <cmath>

#include "kflow/error.hpp"
#include "kflow/model.hpp"

namespace kflow::model {

void optimizer_step(AdamState& state, std::span<double> params, const GradientSet& grads, const AdamConfig& config) {
  const std::size_t n = params.size();
  if (state.m.size() != n || state.v.size() != n || grads.values.size() != n)
    throw ShapeError("optimizer state, parameters and gradients must have equal sizes");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads.values[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

}  // namespace kflow::model
