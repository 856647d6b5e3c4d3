#include "mmbat/net/attention.hpp"

#include <cmath>
#include <string>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::net {

AttentionWeights AttentionWeights::create(ParameterStore& store, const std::string& name, std::size_t global_width,
                                          std::size_t width, std::size_t heads) {
  if (heads == 0 || width % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) + ") must divide the width (" +
                      std::to_string(width) + ")");
  }
  AttentionWeights w;
  w.heads = heads;
  w.fusion = Linear::create(store, name + ".fusion", 3 + global_width, width);
  w.w_q = store.create(name + ".w_q", {width, width}, Init::glorot_uniform, width, width);
  w.w_k = store.create(name + ".w_k", {width, width}, Init::glorot_uniform, width, width);
  w.w_v = store.create(name + ".w_v", {width, width}, Init::glorot_uniform, width, width);
  w.w_m = store.create(name + ".w_m", {width, width}, Init::glorot_uniform, width, width);
  return w;
}

ad::Tensor multi_head_attention(const ad::Tensor& x, const AttentionWeights& w, ad::Tensor* weights_out) {
  if (x.rank() != 3 || x.dim(2) != w.width()) {
    throw DimensionError("attention input must be [G, tokens, " + std::to_string(w.width()) + "]");
  }
  const std::size_t g = x.dim(0), nt = x.dim(1), width = w.width(), h = w.heads, dk = width / h;
  auto split = [&](const ad::Tensor& t) {
    // [G, NT, W] -> [G * H, NT, dk]
    return ad::reshape(ad::permute(ad::reshape(t, {g, nt, h, dk}), {0, 2, 1, 3}), {g * h, nt, dk});
  };
  const ad::Tensor q = split(ad::linear_layer(x, w.w_q));
  const ad::Tensor k = split(ad::linear_layer(x, w.w_k));
  const ad::Tensor v = split(ad::linear_layer(x, w.w_v));
  const ad::Tensor scores = ad::scale(ad::batched_matmul(q, ad::transpose_last2(k)), 1.0 / std::sqrt(double(dk)));
  const ad::Tensor attn = ad::softmax(scores, 2);
  if (weights_out) *weights_out = attn;
  const ad::Tensor heads = ad::batched_matmul(attn, v);  // [G * H, NT, dk]
  const ad::Tensor merged = ad::reshape(ad::permute(ad::reshape(heads, {g, h, nt, dk}), {0, 2, 1, 3}), {g, nt, width});
  return ad::linear_layer(merged, w.w_m);
}

FusedJointFeatures fuse_and_attend(const ad::Tensor& global, const ad::Tensor& joints, const AttentionWeights& w) {
  if (global.rank() != 3 || joints.rank() != 4 || joints.dim(3) != 3 || joints.dim(0) != global.dim(0) ||
      joints.dim(1) != global.dim(1)) {
    throw DimensionError("fuse_and_attend expects G [B, T, Dg] and joints [B, T, NJ, 3]");
  }
  const std::size_t b = global.dim(0), t = global.dim(1), nj = joints.dim(2), dg = global.dim(2);
  if (w.fusion.in() != 3 + dg) {
    throw DimensionError("fusion layer expects " + std::to_string(w.fusion.in() - 3) + "-wide global features");
  }
  FusedJointFeatures out;
  const ad::Tensor g4 = ad::broadcast_to(ad::reshape(global, {b, t, 1, dg}), {b, t, nj, dg});
  out.fused = ad::concat_last_axis({joints, g4});
  out.enhanced = w.fusion(out.fused);
  const ad::Tensor o = multi_head_attention(ad::reshape(out.enhanced, {b * t, nj, w.width()}), w, &out.attention);
  out.output = ad::reshape(o, {b, t, nj, w.width()});
  return out;
}

}  // namespace mmbat::net
