#pragma once

#include "mmbat/net/layers.hpp"

namespace mmbat::net {

/// One GRU direction. Gate blocks along the 3H axis are ordered (r, z, n):
///   r = sigmoid(x W_ir + b_ir + h W_hr + b_hr)
///   z = sigmoid(x W_iz + b_iz + h W_hz + b_hz)
///   n = tanh(x W_in + b_in + r * (h W_hn + b_hn))
///   h' = (1 - z) * n + z * h
struct GruWeights {
  ad::Tensor w_ih;  // [D, 3H]
  ad::Tensor w_hh;  // [H, 3H]
  ad::Tensor b_ih;  // [3H]
  ad::Tensor b_hh;  // [3H]

  static GruWeights create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t hidden);
  std::size_t hidden() const { return w_hh.dim(0); }
};

struct BiGruWeights {
  GruWeights forward;
  GruWeights backward;

  static BiGruWeights create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t hidden);
};

/// Runs one direction over [B, T, D] from a zero state; returns [B, T, H]
/// with outputs stored at their own time index.
ad::Tensor gru_forward(const ad::Tensor& x, const GruWeights& w, bool reverse);

/// Forward and time-reversed passes concatenated per frame -> [B, T, 2H],
/// followed by dropout in training mode.
ad::Tensor bigru_forward(const ad::Tensor& x, const BiGruWeights& w, const ForwardMode& mode);

}  // namespace mmbat::net
