#include "mmbat/autodiff/adam.hpp"

#include <cmath>

#include "mmbat/errors.hpp"

namespace mmbat::ad {

void adam_step(std::span<NamedParameter> params, AdamState& state) {
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) throw ContractError("adam_step: parameter '" + p.name + "' has no gradient");
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.tensor.numel(), 0.0);
      state.second_moment.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ContractError("adam_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                        " parameters, given " + std::to_string(params.size()));
  }

  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  double lr = c.learning_rate;
  if (c.decay_mode == DecayMode::lr_schedule) lr /= 1.0 + c.decay * (t - 1.0);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double shrink = c.decay_mode == DecayMode::weight_decay ? lr * c.decay : 0.0;

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].tensor;
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    if (m.size() != p.numel()) {
      throw ContractError("adam_step: moment size mismatch for parameter '" + params[k].name + "'");
    }
    auto w = p.mutable_values();
    const auto g = p.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + c.epsilon) + shrink * w[i];
    }
    p.zero_grad();
  }
}

}  // namespace mmbat::ad
