#include "mmbat/net/backbone.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"
#include "mmbat/net/point_ops.hpp"

namespace mmbat::net {

SetAbstractionLayer SetAbstractionLayer::create(ParameterStore& store, const std::string& name, std::size_t d_in,
                                                const SetAbstractionConfig& cfg) {
  SetAbstractionLayer l;
  l.radius = cfg.radius;
  l.group_size = cfg.group_size;
  l.mlp = Mlp::create(store, name + ".mlp", d_in + 3, cfg.mlp, true, false);
  l.score_weight = store.create(name + ".score", {cfg.mlp.back(), 1}, Init::glorot_uniform, cfg.mlp.back(), 1);
  return l;
}

ad::Tensor score_aggregate(const ad::Tensor& grouped, const ad::Tensor& score_weight) {
  if (grouped.rank() != 3) throw DimensionError("score_aggregate expects [groups, size, width]");
  if (score_weight.rank() != 2 || score_weight.dim(0) != grouped.dim(2) || score_weight.dim(1) != 1) {
    throw DimensionError("score weight must be [" + std::to_string(grouped.dim(2)) + ", 1]");
  }
  const ad::Tensor scores = ad::linear_layer(grouped, score_weight);  // [G, S, 1]
  const ad::Tensor weights = ad::softmax(scores, 1);
  return ad::sum_axis(ad::mul(grouped, weights), 1);
}

PointSet set_abstraction(const PointSet& in, std::size_t k, const SetAbstractionLayer& layer) {
  const std::size_t n = in.per_frame;
  if (in.positions.size() != in.frames * n * 3) throw DimensionError("point set positions do not match its extents");
  const std::size_t d_in = in.feature_width();
  if (layer.mlp.layers.front().in() != d_in + 3) {
    throw DimensionError("set abstraction expects " + std::to_string(layer.mlp.layers.front().in() - 3) +
                         " input features, got " + std::to_string(d_in));
  }
  const std::size_t s = layer.group_size;
  PointSet out;
  out.frames = in.frames;
  out.per_frame = k;
  out.positions.reserve(in.frames * k * 3);
  std::vector<std::size_t> gather;
  gather.reserve(in.frames * k * s);
  std::vector<double> rel;
  rel.reserve(in.frames * k * s * 3);

  for (std::size_t f = 0; f < in.frames; ++f) {
    const std::span<const double> pos(in.positions.data() + f * n * 3, n * 3);
    const auto picked = farthest_point_sample(pos, k, nearest_to_centroid(pos));
    std::vector<double> centers;
    centers.reserve(k * 3);
    for (std::size_t i : picked) centers.insert(centers.end(), pos.begin() + i * 3, pos.begin() + i * 3 + 3);
    const BallGroups groups = ball_query(pos, centers, layer.radius, s);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < s; ++j) {
        const std::size_t idx = groups.indices[c * s + j];
        gather.push_back(f * n + idx);
        for (int a = 0; a < 3; ++a) rel.push_back((pos[idx * 3 + a] - centers[c * 3 + a]) / layer.radius);
      }
    }
    out.positions.insert(out.positions.end(), centers.begin(), centers.end());
  }

  const std::size_t rows = in.frames * k * s;
  ad::Tensor input = ad::Tensor::from({rows, 3}, std::move(rel));
  if (d_in > 0) input = ad::concat_last_axis({input, ad::gather_rows(in.features, gather)});
  const ad::Tensor h = layer.mlp(input, ForwardMode{}, 0);
  out.features = score_aggregate(ad::reshape(h, {in.frames * k, s, h.dim(1)}), layer.score_weight);
  return out;
}

Backbone Backbone::create(ParameterStore& store, const NetConfig& cfg) {
  Backbone b;
  std::size_t d = cfg.channels - 3;
  for (std::size_t i = 0; i < cfg.sa_stages.size(); ++i) {
    b.stages.push_back(SetAbstractionLayer::create(store, "backbone.sa" + std::to_string(i), d, cfg.sa_stages[i]));
    b.sample_divisors.push_back(cfg.sa_stages[i].sample_divisor);
    d = cfg.sa_stages[i].mlp.back();
  }
  b.global_mlp = Mlp::create(store, "backbone.global.mlp", d + 3, cfg.global_mlp, true, false);
  b.global_score = store.create("backbone.global.score", {cfg.global_mlp.back(), 1}, Init::glorot_uniform,
                                cfg.global_mlp.back(), 1);
  return b;
}

ad::Tensor extract_spatial_features(const ad::Tensor& points, const Backbone& backbone) {
  if (points.rank() != 3 || points.dim(2) < 3) throw DimensionError("backbone input must be [F, N, C>=3]");
  const std::size_t nf = points.dim(0), n = points.dim(1), c = points.dim(2);
  if (n == 0) throw DimensionError("backbone input needs at least one point per frame");
  const auto v = points.values();

  // Canonical order: lexicographic over all channels within each frame.
  std::vector<std::size_t> order(nf * n);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(f * n);
    std::iota(first, first + static_cast<std::ptrdiff_t>(n), f * n);
    std::sort(first, first + static_cast<std::ptrdiff_t>(n), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(v.begin() + a * c, v.begin() + (a + 1) * c, v.begin() + b * c,
                                          v.begin() + (b + 1) * c);
    });
  }
  const ad::Tensor sorted = ad::gather_rows(ad::reshape(points, {nf * n, c}), order);

  PointSet set;
  set.frames = nf;
  set.per_frame = n;
  set.positions.reserve(nf * n * 3);
  const auto sv = sorted.values();
  for (std::size_t r = 0; r < nf * n; ++r) set.positions.insert(set.positions.end(), sv.begin() + r * c, sv.begin() + r * c + 3);
  if (c > 3) set.features = ad::slice(sorted, 1, 3, c - 3);

  for (std::size_t i = 0; i < backbone.stages.size(); ++i) {
    const std::size_t k = std::max<std::size_t>(1, n / backbone.sample_divisors[i]);
    set = set_abstraction(set, std::min(k, set.per_frame), backbone.stages[i]);
  }

  const std::size_t m = set.per_frame;
  ad::Tensor input = ad::Tensor::from({nf * m, 3}, set.positions);
  if (set.features.defined()) input = ad::concat_last_axis({input, set.features});
  const ad::Tensor h = backbone.global_mlp(input, ForwardMode{}, 0);
  return score_aggregate(ad::reshape(h, {nf, m, h.dim(1)}), backbone.global_score);
}

}  // namespace mmbat::net
