#pragma once

#include "mmbat/net/layers.hpp"

namespace mmbat::net {

struct AttentionWeights {
  std::size_t heads = 8;
  Linear fusion;    // [3 + Dg] -> W, with bias
  ad::Tensor w_q;   // [W, W]; head h owns columns [h*dk, (h+1)*dk)
  ad::Tensor w_k;
  ad::Tensor w_v;
  ad::Tensor w_m;   // [W, W] output projection

  static AttentionWeights create(ParameterStore& store, const std::string& name, std::size_t global_width,
                                 std::size_t width, std::size_t heads);
  std::size_t width() const { return w_q.dim(0); }
};

struct FusedJointFeatures {
  ad::Tensor fused;      // I   [B, T, NJ, 3 + Dg]
  ad::Tensor enhanced;   // I'  [B, T, NJ, W]
  ad::Tensor output;     // O   [B, T, NJ, W]
  ad::Tensor attention;  // [B * T * heads, NJ, NJ], rows sum to 1
};

/// Multi-head scaled dot-product self-attention over the token axis of
/// x [G, NJ, W]: per head softmax_rows(Q K^T / sqrt(dk)) V, heads
/// concatenated and projected by w_m. Optionally returns the weights.
ad::Tensor multi_head_attention(const ad::Tensor& x, const AttentionWeights& w, ad::Tensor* weights_out = nullptr);

/// Broadcasts G [B, T, Dg] to every joint, concatenates the joint positions
/// J [B, T, NJ, 3] in front, applies the fusion layer and attends over joints.
FusedJointFeatures fuse_and_attend(const ad::Tensor& global, const ad::Tensor& joints, const AttentionWeights& w);

}  // namespace mmbat::net
