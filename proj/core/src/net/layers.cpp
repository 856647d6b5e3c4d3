#include "mmbat/net/layers.hpp"

#include <cmath>
#include <random>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::net {

ad::Tensor ForwardMode::apply_dropout(const ad::Tensor& x, std::uint64_t site) const {
  if (!training || dropout == 0.0) return x;
  return ad::dropout(x, dropout, true, util::derive_seed(seed, {site}));
}

ad::Tensor ParameterStore::create(const std::string& name, ad::Shape shape, Init init, std::size_t fan_in,
                                  std::size_t fan_out) {
  if (index_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
  std::vector<double> values(ad::shape_numel(shape), 0.0);
  if (init != Init::zeros) {
    const double limit = init == Init::glorot_uniform
                             ? std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(1, fan_in + fan_out)))
                             : std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(1, fan_in)));
    std::mt19937_64 rng(util::derive_seed(seed_, {util::fnv1a64(name.data(), name.size())}));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& v : values) v = u(rng);
  }
  ad::Tensor t = ad::Tensor::from(std::move(shape), std::move(values), true);
  index_[name] = params_.size();
  params_.push_back({name, t});
  return t;
}

const ad::Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return params_[it->second].tensor;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

Linear Linear::create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                      bool with_bias, Init init) {
  Linear l;
  l.weight = store.create(name + ".weight", {in, out}, init, in, out);
  if (with_bias) l.bias = store.create(name + ".bias", {out}, Init::zeros);
  return l;
}

Mlp Mlp::create(ParameterStore& store, const std::string& name, std::size_t in,
                const std::vector<std::size_t>& widths, bool activate_last, bool hidden_dropout) {
  if (widths.empty()) throw ConfigError("mlp '" + name + "' needs at least one layer");
  Mlp m;
  m.activate_last = activate_last;
  m.hidden_dropout = hidden_dropout;
  std::size_t prev = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const bool relu_after = i + 1 < widths.size() || activate_last;
    m.layers.push_back(Linear::create(store, name + "." + std::to_string(i), prev, widths[i], true,
                                      relu_after ? Init::he_uniform : Init::glorot_uniform));
    prev = widths[i];
  }
  return m;
}

ad::Tensor Mlp::operator()(const ad::Tensor& x, const ForwardMode& mode, std::uint64_t site) const {
  if (x.dim(-1) != layers.front().in()) {
    throw DimensionError("mlp expects input width " + std::to_string(layers.front().in()) + ", got " +
                         std::to_string(x.dim(-1)));
  }
  ad::Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i](h);
    const bool last = i + 1 == layers.size();
    if (!last || activate_last) h = ad::relu(h);
    if (!last && hidden_dropout) h = mode.apply_dropout(h, util::derive_seed(site, {i}));
  }
  return h;
}

}  // namespace mmbat::net
