#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmbat/autodiff/adam.hpp"
#include "mmbat/autodiff/ops.hpp"
#include "mmbat/autodiff/tensor.hpp"

namespace mmbat::net {

/// Training flag plus the dropout stream. Every dropout call site passes its
/// own key so masks are independent across layers but replayable.
struct ForwardMode {
  bool training = false;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  ad::Tensor apply_dropout(const ad::Tensor& x, std::uint64_t site) const;
};

enum class Init { zeros, glorot_uniform, he_uniform };

/// Owns the trainable tensors of a model in registration order. Each tensor
/// is initialized from a stream keyed by (seed, name), so adding a layer does
/// not perturb the others.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}

  ad::Tensor create(const std::string& name, ad::Shape shape, Init init, std::size_t fan_in = 0,
                    std::size_t fan_out = 0);
  const ad::Tensor& get(const std::string& name) const;

  std::vector<ad::NamedParameter>& parameters() { return params_; }
  const std::vector<ad::NamedParameter>& parameters() const { return params_; }
  std::size_t scalar_count() const;

 private:
  std::uint64_t seed_;
  std::vector<ad::NamedParameter> params_;
  std::map<std::string, std::size_t> index_;
};

struct Linear {
  ad::Tensor weight;  // [in, out]
  ad::Tensor bias;    // [out], may be undefined

  static Linear create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                       bool with_bias = true, Init init = Init::glorot_uniform);
  ad::Tensor operator()(const ad::Tensor& x) const { return ad::linear_layer(x, weight, bias); }
  std::size_t in() const { return weight.dim(0); }
  std::size_t out() const { return weight.dim(1); }
};

/// Stack of linear layers over the last axis with ReLU between them. With
/// `activate_last` the final layer is followed by ReLU as well. Hidden
/// activations get dropout in training mode.
struct Mlp {
  std::vector<Linear> layers;
  bool activate_last = false;
  bool hidden_dropout = true;

  static Mlp create(ParameterStore& store, const std::string& name, std::size_t in,
                    const std::vector<std::size_t>& widths, bool activate_last, bool hidden_dropout = true);
  ad::Tensor operator()(const ad::Tensor& x, const ForwardMode& mode, std::uint64_t site) const;
  std::size_t out() const { return layers.back().out(); }
};

}  // namespace mmbat::net
