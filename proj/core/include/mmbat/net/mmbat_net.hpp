#pragma once

#include <span>

#include "mmbat/body/body_template.hpp"
#include "mmbat/net/attention.hpp"
#include "mmbat/net/backbone.hpp"
#include "mmbat/net/config.hpp"
#include "mmbat/net/crop.hpp"
#include "mmbat/net/gru.hpp"
#include "mmbat/net/layers.hpp"
#include "mmbat/net/losses.hpp"

namespace mmbat::net {

/// G [B, T, Dg] -> per-frame translations for the next window, [B, T, 3].
ad::Tensor predict_translation(const ad::Tensor& global, const Mlp& head, const ForwardMode& mode);

/// G [B, T, Dg] -> coarse joints [B, T, NJ, 3].
ad::Tensor estimate_coarse_skeleton(const ad::Tensor& global, const Mlp& head, std::size_t n_joints,
                                    const ForwardMode& mode);

struct RegressionHeads {
  Mlp pose;               // shared across joints, W -> ... -> 6
  ad::Tensor joint_bias;  // [NJ, 6], added per joint; initialized to the identity rotation
  Mlp shape;              // mean-pooled token -> ... -> NB
  Mlp translation;        // mean-pooled token -> ... -> 3

  static RegressionHeads create(ParameterStore& store, const NetConfig& cfg);
};

struct RegressedParams {
  ad::Tensor theta;  // [B, T, 6NJ]
  ad::Tensor beta;   // [B, T, NB]
  ad::Tensor gamma;  // [B, T, 3]
};

/// O [B, T, NJ, W] -> body parameters. Pose comes per joint token; shape and
/// translation come from the mean over joint tokens.
RegressedParams regress_smpl_params(const ad::Tensor& tokens, const RegressionHeads& heads, const ForwardMode& mode);

struct NetOutput {
  ad::Tensor anchor;            // [B, 3]; window reference point (mean crop center)
  ad::Tensor features;          // F [B, T, D_f]
  ad::Tensor global;            // G [B, T, Dg]
  ad::Tensor translation;       // gamma_p [B, T, 3], radar coordinates
  ad::Tensor coarse_joints;     // J_hat [B, T, NJ, 3], radar coordinates
  FusedJointFeatures attention;
  BodyEstimate body;            // frames flattened to B * T, radar coordinates
};

/// The full three-stage network. Point coordinates and all positional
/// outputs are handled relative to the per-window anchor internally and
/// reported in radar coordinates.
class MmbatNet {
 public:
  MmbatNet(const NetConfig& cfg, const body::BodyTemplate& tmpl);

  NetOutput forward(std::span<const ProcessedSequence> batch, const ForwardMode& mode) const;

  const NetConfig& config() const { return cfg_; }
  const body::BodyTemplate& body_template() const { return tmpl_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  std::vector<ad::NamedParameter>& parameters() { return store_.parameters(); }

  Backbone backbone;
  BiGruWeights gru;
  Mlp translation_head;
  Mlp skeleton_head;
  AttentionWeights attention;
  RegressionHeads regression;

 private:
  NetConfig cfg_;
  body::BodyTemplate tmpl_;
  ParameterStore store_;
};

}  // namespace mmbat::net
