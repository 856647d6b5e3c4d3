#include "mmbat/net/mmbat_net.hpp"

#include <string>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::net {
namespace {

enum DropoutSite : std::uint64_t { kTranslation = 1, kSkeleton, kPose, kShape, kRootHead };

std::vector<std::size_t> with_output(std::vector<std::size_t> hidden, std::size_t out) {
  hidden.push_back(out);
  return hidden;
}

}  // namespace

ad::Tensor predict_translation(const ad::Tensor& global, const Mlp& head, const ForwardMode& mode) {
  if (global.rank() != 3) throw DimensionError("predict_translation expects G [B, T, Dg]");
  if (head.out() != 3) throw DimensionError("translation head must output 3 values");
  return head(global, mode, kTranslation);
}

ad::Tensor estimate_coarse_skeleton(const ad::Tensor& global, const Mlp& head, std::size_t n_joints,
                                    const ForwardMode& mode) {
  if (global.rank() != 3) throw DimensionError("estimate_coarse_skeleton expects G [B, T, Dg]");
  if (head.out() != 3 * n_joints) throw DimensionError("skeleton head width does not match the joint count");
  return ad::reshape(head(global, mode, kSkeleton), {global.dim(0), global.dim(1), n_joints, 3});
}

RegressionHeads RegressionHeads::create(ParameterStore& store, const NetConfig& cfg) {
  RegressionHeads h;
  h.pose = Mlp::create(store, "pose_head", cfg.fusion_width, with_output(cfg.pose_hidden, 6), false);
  h.joint_bias = store.create("pose_head.joint_bias", {cfg.n_joints, 6}, Init::zeros);
  auto jb = h.joint_bias.mutable_values();
  for (std::size_t j = 0; j < cfg.n_joints; ++j) {
    jb[j * 6 + 0] = 1.0;
    jb[j * 6 + 4] = 1.0;
  }
  h.shape = Mlp::create(store, "shape_head", cfg.fusion_width, with_output(cfg.shape_hidden, cfg.n_shape), false);
  h.translation = Mlp::create(store, "root_head", cfg.fusion_width, with_output(cfg.shape_hidden, 3), false);
  return h;
}

RegressedParams regress_smpl_params(const ad::Tensor& tokens, const RegressionHeads& heads, const ForwardMode& mode) {
  if (tokens.rank() != 4) throw DimensionError("regress_smpl_params expects O [B, T, NJ, W]");
  const std::size_t b = tokens.dim(0), t = tokens.dim(1), nj = tokens.dim(2);
  if (heads.joint_bias.dim(0) != nj) {
    throw DimensionError("pose head is configured for " + std::to_string(heads.joint_bias.dim(0)) +
                         " joints, got " + std::to_string(nj) + " tokens");
  }
  RegressedParams p;
  const ad::Tensor pose = ad::add(heads.pose(tokens, mode, kPose), heads.joint_bias);  // [B, T, NJ, 6]
  p.theta = ad::reshape(pose, {b, t, nj * 6});
  const ad::Tensor pooled = ad::mean_axis(tokens, 2);
  p.beta = heads.shape(pooled, mode, kShape);
  p.gamma = heads.translation(pooled, mode, kRootHead);
  return p;
}

MmbatNet::MmbatNet(const NetConfig& cfg, const body::BodyTemplate& tmpl)
    : cfg_(cfg), tmpl_(tmpl), store_(cfg.init_seed) {
  cfg_.validate();
  tmpl_.validate();
  if (tmpl_.n_joints != cfg_.n_joints || tmpl_.n_shape != cfg_.n_shape) {
    throw ConfigError("network n_joints/n_shape (" + std::to_string(cfg_.n_joints) + "/" +
                      std::to_string(cfg_.n_shape) + ") do not match the body template (" +
                      std::to_string(tmpl_.n_joints) + "/" + std::to_string(tmpl_.n_shape) + ")");
  }
  backbone = Backbone::create(store_, cfg_);
  gru = BiGruWeights::create(store_, "gru", cfg_.feature_width(), cfg_.gru_hidden);
  translation_head = Mlp::create(store_, "translation_head", cfg_.global_width(), with_output(cfg_.translation_hidden, 3), false);
  skeleton_head = Mlp::create(store_, "skeleton_head", cfg_.global_width(),
                              with_output(cfg_.skeleton_hidden, 3 * cfg_.n_joints), false);
  attention = AttentionWeights::create(store_, "attention", cfg_.global_width(), cfg_.fusion_width, cfg_.heads);
  regression = RegressionHeads::create(store_, cfg_);
}

NetOutput MmbatNet::forward(std::span<const ProcessedSequence> batch, const ForwardMode& mode) const {
  if (batch.empty()) throw ContractError("forward needs at least one window");
  const std::size_t b = batch.size(), t = cfg_.window, n = cfg_.points, c = cfg_.channels;
  const std::size_t nj = cfg_.n_joints;

  std::vector<double> anchor(b * 3, 0.0);
  std::vector<double> pts;
  pts.reserve(b * t * n * c);
  for (std::size_t i = 0; i < b; ++i) {
    const ProcessedSequence& w = batch[i];
    if (w.window != t || w.points != n || w.channels != c || w.data.size() != t * n * c || w.centers.size() != t * 3) {
      throw DimensionError("window " + std::to_string(i) + " does not match the configured T x N x C = " +
                           std::to_string(t) + " x " + std::to_string(n) + " x " + std::to_string(c));
    }
    for (std::size_t f = 0; f < t; ++f) {
      for (int a = 0; a < 3; ++a) anchor[i * 3 + a] += w.centers[f * 3 + a] / static_cast<double>(t);
    }
    for (std::size_t p = 0; p < t * n; ++p) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double v = w.data[p * c + ch];
        pts.push_back(ch < 3 ? v - anchor[i * 3 + ch] : v);
      }
    }
  }

  NetOutput out;
  out.anchor = ad::Tensor::from({b, 3}, anchor);
  const ad::Tensor points = ad::Tensor::from({b * t, n, c}, std::move(pts));
  out.features = ad::reshape(extract_spatial_features(points, backbone), {b, t, cfg_.feature_width()});
  out.global = bigru_forward(out.features, gru, mode);

  const ad::Tensor anchor3 = ad::reshape(out.anchor, {b, 1, 3});
  out.translation = ad::add(predict_translation(out.global, translation_head, mode), anchor3);
  const ad::Tensor joints_rel = estimate_coarse_skeleton(out.global, skeleton_head, nj, mode);
  out.coarse_joints = ad::add(joints_rel, ad::reshape(out.anchor, {b, 1, 1, 3}));

  out.attention = fuse_and_attend(out.global, joints_rel, attention);
  const RegressedParams reg = regress_smpl_params(out.attention.output, regression, mode);
  body::BodyParams params{ad::reshape(reg.theta, {b * t, 6 * nj}), ad::reshape(reg.beta, {b * t, cfg_.n_shape}),
                          ad::reshape(ad::add(reg.gamma, anchor3), {b * t, 3})};
  out.body = evaluate_body(tmpl_, params);
  return out;
}

}  // namespace mmbat::net
