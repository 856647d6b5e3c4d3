#pragma once

#include <vector>

#include "mmbat/autodiff/tensor.hpp"
#include "mmbat/body/body_template.hpp"

namespace mmbat::body {

/// Pose/shape/translation triple for F frames.
///   theta [F, 6 * n_joints]  per-joint rotations relative to the parent, 6D form
///   beta  [F, n_shape]
///   gamma [F, 3]             root translation, meters
struct BodyParams {
  ad::Tensor theta;
  ad::Tensor beta;
  ad::Tensor gamma;

  std::size_t frames() const { return gamma.dim(0); }
  /// Throws DimensionError unless the extents match the template.
  void check(const BodyTemplate& t) const;
};

/// Identity pose, zero shape, zero translation.
BodyParams rest_params(const BodyTemplate& t, std::size_t frames);

/// World-space bone transforms produced by forward kinematics.
struct Kinematics {
  ad::Tensor joints;                            // [F, n_joints, 3], includes gamma
  std::vector<ad::Tensor> world_rotations;      // per joint, [F, 3, 3]
  std::vector<ad::Tensor> world_translations;   // per joint, [F, 3], excludes gamma
  ad::Tensor shaped_joints;                     // [F, n_joints, 3] rest joints after the shape blend
};

/// Chains per-joint rotations ([F, n_joints, 3, 3]) from the root outward over
/// the shape-adjusted rest skeleton, then adds gamma to every joint.
Kinematics forward_kinematics(const BodyTemplate& t, const ad::Tensor& rotations, const ad::Tensor& beta,
                              const ad::Tensor& gamma);
Kinematics forward_kinematics(const BodyTemplate& t, const BodyParams& params);

/// Linear blend skinning of the shape-adjusted rest vertices; [F, n_vertices, 3].
ad::Tensor skin_vertices(const BodyTemplate& t, const Kinematics& kin, const ad::Tensor& beta,
                         const ad::Tensor& gamma);

struct BodyOutput {
  ad::Tensor joints;    // [F, n_joints, 3]
  ad::Tensor vertices;  // [F, n_vertices, 3]
};

/// Full model evaluation: J, M = body(theta, beta, gamma).
BodyOutput body_forward(const BodyTemplate& t, const BodyParams& params);

}  // namespace mmbat::body
