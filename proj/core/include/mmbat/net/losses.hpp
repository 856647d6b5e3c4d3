#pragma once

#include "mmbat/body/body_model.hpp"
#include "mmbat/net/config.hpp"

namespace mmbat::net {

/// Body parameters for F frames together with everything derived from them.
struct BodyEstimate {
  body::BodyParams params;  // theta [F, 6NJ], beta [F, NB], gamma [F, 3]
  ad::Tensor rotations;     // [F, NJ, 3, 3]
  ad::Tensor joints;        // [F, NJ, 3]
  ad::Tensor vertices;      // [F, NV, 3]
};

/// Runs the rotation conversion and the body model on `params`.
BodyEstimate evaluate_body(const body::BodyTemplate& tmpl, const body::BodyParams& params);

struct LossInputs {
  BodyEstimate body;
  ad::Tensor translation;    // predicted gamma_p, [..., 3]
  ad::Tensor coarse_joints;  // J_hat, same element count as body.joints
};

struct LossTargets {
  BodyEstimate body;
  ad::Tensor next_translation;  // ground-truth gamma of the following window
};

/// Raw (unscaled) terms plus the scaled compositions
///   l_smpl  = s_theta l_theta + s_beta l_beta + s_gamma l_gamma + s_J l_J + s_M l_M
///   l_total = s_joint l_joint + l_smpl + s_pred l_pred
struct LossReport {
  double l_pred = 0, l_joint = 0, l_theta = 0, l_beta = 0, l_gamma = 0, l_J = 0, l_M = 0;
  double l_smpl = 0, l_total = 0;
};

struct Losses {
  ad::Tensor l_pred, l_joint, l_theta, l_beta, l_gamma, l_J, l_M, l_smpl, l_total;
  LossReport report() const;
};

/// L1 distance over the last axis (sum of absolute coordinate differences),
/// averaged over all leading entries.
ad::Tensor mean_l1(const ad::Tensor& a, const ad::Tensor& b);

/// Every term of the objective. l_theta is the mean geodesic angle (radians)
/// between predicted and true per-joint rotations. A missing (undefined)
/// target raises ContractError naming the term.
Losses compute_losses(const LossInputs& pred, const LossTargets& truth, const LossScales& scales);

}  // namespace mmbat::net
