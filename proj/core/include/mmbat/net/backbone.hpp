#pragma once

#include <vector>

#include "mmbat/net/config.hpp"
#include "mmbat/net/layers.hpp"

namespace mmbat::net {

/// A batch of equally sized point sets: `frames` sets of `per_frame` points.
/// Positions are plain values; features carry the gradient path.
struct PointSet {
  std::size_t frames = 0;
  std::size_t per_frame = 0;
  std::vector<double> positions;  // frames * per_frame x 3
  ad::Tensor features;            // [frames * per_frame, d]; undefined when d == 0

  std::size_t feature_width() const { return features.defined() ? features.dim(1) : 0; }
};

struct SetAbstractionLayer {
  double radius = 0.2;
  std::size_t group_size = 16;
  Mlp mlp;                 // shared per-point MLP on [relative position / radius, features]
  ad::Tensor score_weight; // [d_out, 1], maps each point feature to its aggregation score

  static SetAbstractionLayer create(ParameterStore& store, const std::string& name, std::size_t d_in,
                                    const SetAbstractionConfig& cfg);
};

/// Softmax-weighted sum over the group axis: grouped [G, S, d] -> [G, d],
/// weights softmax_S(grouped . score_weight).
ad::Tensor score_aggregate(const ad::Tensor& grouped, const ad::Tensor& score_weight);

/// Samples k centers per set by FPS (started at the point nearest the set's
/// centroid), groups neighbors by ball query and aggregates each group.
PointSet set_abstraction(const PointSet& in, std::size_t k, const SetAbstractionLayer& layer);

struct Backbone {
  std::vector<SetAbstractionLayer> stages;
  std::vector<std::size_t> sample_divisors;
  Mlp global_mlp;
  ad::Tensor global_score;  // [D_f, 1]

  static Backbone create(ParameterStore& store, const NetConfig& cfg);
};

/// Per-frame spatial features. `points` is [F, N, C] (position first, then
/// C - 3 feature channels). Points are put in lexicographic order first, so
/// the result does not depend on the input order. Returns [F, D_f].
ad::Tensor extract_spatial_features(const ad::Tensor& points, const Backbone& backbone);

}  // namespace mmbat::net
