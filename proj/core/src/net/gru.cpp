#include "mmbat/net/gru.hpp"

#include <string>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::net {

GruWeights GruWeights::create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t hidden) {
  GruWeights w;
  w.w_ih = store.create(name + ".w_ih", {in, 3 * hidden}, Init::glorot_uniform, in, hidden);
  w.w_hh = store.create(name + ".w_hh", {hidden, 3 * hidden}, Init::glorot_uniform, hidden, hidden);
  w.b_ih = store.create(name + ".b_ih", {3 * hidden}, Init::zeros);
  w.b_hh = store.create(name + ".b_hh", {3 * hidden}, Init::zeros);
  return w;
}

BiGruWeights BiGruWeights::create(ParameterStore& store, const std::string& name, std::size_t in,
                                  std::size_t hidden) {
  return {GruWeights::create(store, name + ".fwd", in, hidden), GruWeights::create(store, name + ".bwd", in, hidden)};
}

ad::Tensor gru_forward(const ad::Tensor& x, const GruWeights& w, bool reverse) {
  if (x.rank() != 3) throw DimensionError("gru input must be [B, T, D]");
  const std::size_t b = x.dim(0), t_len = x.dim(1), d = x.dim(2), h = w.hidden();
  if (w.w_ih.dim(0) != d) {
    throw DimensionError("gru expects input width " + std::to_string(w.w_ih.dim(0)) + ", got " + std::to_string(d));
  }
  if (t_len == 0) throw DimensionError("gru needs at least one time step");
  const ad::Tensor proj = ad::linear_layer(x, w.w_ih, w.b_ih);  // [B, T, 3H]
  ad::Tensor state = ad::Tensor::zeros({b, h});
  std::vector<ad::Tensor> outputs(t_len);
  for (std::size_t step = 0; step < t_len; ++step) {
    const std::size_t t = reverse ? t_len - 1 - step : step;
    const ad::Tensor xi = ad::reshape(ad::slice(proj, 1, t, 1), {b, 3 * h});
    const ad::Tensor hh = ad::linear_layer(state, w.w_hh, w.b_hh);
    const ad::Tensor r = ad::sigmoid(ad::slice(xi, 1, 0, h) + ad::slice(hh, 1, 0, h));
    const ad::Tensor z = ad::sigmoid(ad::slice(xi, 1, h, h) + ad::slice(hh, 1, h, h));
    const ad::Tensor n = ad::tanh(ad::slice(xi, 1, 2 * h, h) + r * ad::slice(hh, 1, 2 * h, h));
    state = n + z * (state - n);
    outputs[t] = ad::reshape(state, {b, 1, h});
  }
  return ad::concat(outputs, 1);
}

ad::Tensor bigru_forward(const ad::Tensor& x, const BiGruWeights& w, const ForwardMode& mode) {
  const ad::Tensor out = ad::concat_last_axis({gru_forward(x, w.forward, false), gru_forward(x, w.backward, true)});
  return mode.apply_dropout(out, 0x677275ULL);
}

}  // namespace mmbat::net
