#include "mmbat/net/losses.hpp"

#include <string>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/body/rotation.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::net {
namespace {

void require(const ad::Tensor& t, const char* term) {
  if (!t.defined()) throw ContractError(std::string("ground truth for ") + term + " is missing");
}

}  // namespace

BodyEstimate evaluate_body(const body::BodyTemplate& tmpl, const body::BodyParams& params) {
  params.check(tmpl);
  const std::size_t f = params.frames();
  BodyEstimate e;
  e.params = params;
  e.rotations = body::rot6d_to_matrix(ad::reshape(params.theta, {f, tmpl.n_joints, 6}));
  const body::Kinematics kin = body::forward_kinematics(tmpl, e.rotations, params.beta, params.gamma);
  e.joints = kin.joints;
  e.vertices = body::skin_vertices(tmpl, kin, params.beta, params.gamma);
  return e;
}

ad::Tensor mean_l1(const ad::Tensor& a, const ad::Tensor& b) {
  if (a.numel() != b.numel() || a.dim(-1) != b.dim(-1)) {
    throw DimensionError("l1 loss: shapes " + ad::shape_str(a.shape()) + " and " + ad::shape_str(b.shape()) +
                         " do not match");
  }
  if (a.numel() == 0) return ad::scale(ad::sum(a), 0.0);
  const ad::Tensor d = ad::abs(ad::sub(ad::reshape(a, b.shape()), b));
  return ad::scale(ad::sum(d), static_cast<double>(d.dim(-1)) / static_cast<double>(d.numel()));
}

LossReport Losses::report() const {
  return {l_pred.item(), l_joint.item(), l_theta.item(), l_beta.item(), l_gamma.item(),
          l_J.item(),    l_M.item(),     l_smpl.item(),  l_total.item()};
}

Losses compute_losses(const LossInputs& pred, const LossTargets& truth, const LossScales& s) {
  require(truth.next_translation, "l_pred");
  require(truth.body.joints, "l_joint");
  require(truth.body.rotations, "l_theta");
  require(truth.body.params.beta, "l_beta");
  require(truth.body.params.gamma, "l_gamma");
  require(truth.body.vertices, "l_M");

  Losses l;
  l.l_pred = mean_l1(pred.translation, truth.next_translation);
  l.l_joint = mean_l1(pred.coarse_joints, truth.body.joints);
  if (pred.body.rotations.shape() != truth.body.rotations.shape()) {
    throw DimensionError("rotation extents differ between prediction and ground truth");
  }
  l.l_theta = ad::mean(body::geodesic_distance(pred.body.rotations, truth.body.rotations));
  l.l_beta = mean_l1(pred.body.params.beta, truth.body.params.beta);
  l.l_gamma = mean_l1(pred.body.params.gamma, truth.body.params.gamma);
  l.l_J = mean_l1(pred.body.joints, truth.body.joints);
  l.l_M = mean_l1(pred.body.vertices, truth.body.vertices);
  l.l_smpl = ad::scale(l.l_theta, s.theta) + ad::scale(l.l_beta, s.beta) + ad::scale(l.l_gamma, s.gamma) +
             ad::scale(l.l_J, s.joints) + ad::scale(l.l_M, s.vertices);
  l.l_total = ad::scale(l.l_joint, s.joint) + l.l_smpl + ad::scale(l.l_pred, s.pred);
  return l;
}

}  // namespace mmbat::net
