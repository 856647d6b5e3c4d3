#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmbat/autodiff/tensor.hpp"

namespace mmbat::ad {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

/// How the configured decay rate is applied.
///   weight_decay: decoupled (AdamW-style) shrinkage p -= lr * decay * p.
///   lr_schedule:  inverse-time learning-rate decay lr_t = lr / (1 + decay * (t - 1)).
enum class DecayMode { weight_decay, lr_schedule };

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay = 1e-4;
  DecayMode decay_mode = DecayMode::weight_decay;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update over all parameters, then zeroes their
/// grads. Throws ContractError naming the first parameter without a grad.
void adam_step(std::span<NamedParameter> params, AdamState& state);

}  // namespace mmbat::ad
