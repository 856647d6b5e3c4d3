#include "mmbat/body/body_model.hpp"

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/body/rotation.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::body {

using ad::Tensor;

void BodyParams::check(const BodyTemplate& t) const {
  if (!theta.defined() || !beta.defined() || !gamma.defined()) throw DimensionError("body params are incomplete");
  if (gamma.rank() != 2 || gamma.dim(1) != 3) {
    throw DimensionError("gamma must be [F x 3], got " + ad::shape_str(gamma.shape()));
  }
  const std::size_t f = gamma.dim(0);
  if (theta.shape() != ad::Shape{f, 6 * t.n_joints}) {
    throw DimensionError("theta must be " + ad::shape_str({f, 6 * t.n_joints}) + ", got " +
                         ad::shape_str(theta.shape()));
  }
  if (beta.shape() != ad::Shape{f, t.n_shape}) {
    throw DimensionError("beta must be " + ad::shape_str({f, t.n_shape}) + ", got " + ad::shape_str(beta.shape()));
  }
}

BodyParams rest_params(const BodyTemplate& t, std::size_t frames) {
  std::vector<double> theta(frames * 6 * t.n_joints, 0.0);
  for (std::size_t i = 0; i < frames * t.n_joints; ++i) {
    theta[i * 6 + 0] = 1.0;
    theta[i * 6 + 4] = 1.0;
  }
  return {Tensor::from({frames, 6 * t.n_joints}, std::move(theta)), Tensor::zeros({frames, t.n_shape}),
          Tensor::zeros({frames, 3})};
}

namespace {

// [F, n*3] rest positions after the shape blend.
Tensor shape_blend(const std::vector<double>& rest, const std::vector<double>& dirs, std::size_t count,
                   std::size_t n_shape, const Tensor& beta) {
  const std::size_t f = beta.dim(0);
  const Tensor rest_t = Tensor::from({count * 3}, rest);
  if (n_shape == 0) return ad::broadcast_to(rest_t, {f, count * 3});
  const Tensor dirs_t = Tensor::from({n_shape, count * 3}, dirs);
  return ad::add(ad::matmul(beta, dirs_t), rest_t);
}

}  // namespace

Kinematics forward_kinematics(const BodyTemplate& t, const Tensor& rotations, const Tensor& beta,
                              const Tensor& gamma) {
  const std::size_t nj = t.n_joints;
  if (gamma.rank() != 2 || gamma.dim(1) != 3) {
    throw DimensionError("gamma must be [F x 3], got " + ad::shape_str(gamma.shape()));
  }
  const std::size_t f = gamma.dim(0);
  if (rotations.shape() != ad::Shape{f, nj, 3, 3}) {
    throw DimensionError("rotations must be " + ad::shape_str({f, nj, 3, 3}) + ", got " +
                         ad::shape_str(rotations.shape()));
  }
  if (beta.shape() != ad::Shape{f, t.n_shape}) {
    throw DimensionError("beta must be " + ad::shape_str({f, t.n_shape}) + ", got " + ad::shape_str(beta.shape()));
  }

  Kinematics k;
  const Tensor shaped = shape_blend(t.rest_joints, t.shape_dirs_joints, nj, t.n_shape, beta);
  k.shaped_joints = ad::reshape(shaped, {f, nj, 3});
  std::vector<Tensor> rest(nj);
  for (std::size_t j = 0; j < nj; ++j) rest[j] = ad::reshape(ad::slice(k.shaped_joints, 1, j, 1), {f, 3});

  // Joint positions are tracked as displacements from the shaped rest skeleton
  // so an identity pose reproduces the rest joints bit for bit.
  k.world_rotations.resize(nj);
  k.world_translations.resize(nj);
  std::vector<Tensor> disp(nj);
  std::vector<Tensor> placed(nj);
  for (std::size_t j = 0; j < nj; ++j) {
    const Tensor local = ad::reshape(ad::slice(rotations, 1, j, 1), {f, 3, 3});
    if (t.parent[j] < 0) {
      k.world_rotations[j] = local;
      disp[j] = Tensor::zeros({f, 3});
    } else {
      const auto p = static_cast<std::size_t>(t.parent[j]);
      const Tensor offset = rest[j] - rest[p];
      const Tensor moved = ad::reshape(ad::batched_matmul(k.world_rotations[p], ad::reshape(offset, {f, 3, 1})), {f, 3});
      disp[j] = disp[p] + (moved - offset);
      k.world_rotations[j] = ad::batched_matmul(k.world_rotations[p], local);
    }
    k.world_translations[j] = rest[j] + disp[j];
    placed[j] = ad::reshape(k.world_translations[j], {f, 1, 3});
  }
  k.joints = ad::add(ad::concat(placed, 1), ad::reshape(gamma, {f, 1, 3}));
  return k;
}

Kinematics forward_kinematics(const BodyTemplate& t, const BodyParams& params) {
  params.check(t);
  const std::size_t f = params.frames();
  const Tensor rot = rot6d_to_matrix(ad::reshape(params.theta, {f, t.n_joints, 6}));
  return forward_kinematics(t, rot, params.beta, params.gamma);
}

Tensor skin_vertices(const BodyTemplate& t, const Kinematics& kin, const Tensor& beta, const Tensor& gamma) {
  const std::size_t nj = t.n_joints, nv = t.n_vertices;
  const std::size_t f = gamma.dim(0);
  if (kin.world_rotations.size() != nj || kin.joints.dim(0) != f) {
    throw DimensionError("skin_vertices: kinematics do not match the template and frame count");
  }
  // Per-joint skinning transform in displacement form: [R - I | t - R * rest_joint]
  // so that v' = v + sum_j w_j ((R_j - I) v + shift_j) is exact at the rest pose.
  const Tensor eye = Tensor::from({9}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  std::vector<Tensor> transforms(nj);
  for (std::size_t j = 0; j < nj; ++j) {
    const Tensor rest_j = ad::reshape(ad::slice(kin.shaped_joints, 1, j, 1), {f, 3});
    const Tensor rotated_rest = ad::reshape(ad::batched_matmul(kin.world_rotations[j], ad::reshape(rest_j, {f, 3, 1})), {f, 3});
    const Tensor shift = (kin.world_translations[j] - rest_j) - (rotated_rest - rest_j);
    const Tensor rot_minus_eye = ad::sub(ad::reshape(kin.world_rotations[j], {f, 9}), eye);
    transforms[j] = ad::reshape(ad::concat_last_axis({rot_minus_eye, shift}), {f, 1, 12});
  }
  const Tensor stacked = ad::concat(transforms, 1);  // [F, nj, 12]
  const Tensor by_joint = ad::reshape(ad::permute(stacked, {1, 0, 2}), {nj, f * 12});
  const Tensor weights = Tensor::from({nv, nj}, t.skin_weights);
  const Tensor blended = ad::permute(ad::reshape(ad::matmul(weights, by_joint), {nv, f, 12}), {1, 0, 2});

  const Tensor rot = ad::reshape(ad::slice(blended, 2, 0, 9), {f * nv, 3, 3});
  const Tensor shift = ad::slice(blended, 2, 9, 3);
  const Tensor shaped = shape_blend(t.rest_vertices, t.shape_dirs_vertices, nv, t.n_shape, beta);
  const Tensor delta = ad::reshape(ad::batched_matmul(rot, ad::reshape(shaped, {f * nv, 3, 1})), {f, nv, 3});
  return ad::add(ad::reshape(shaped, {f, nv, 3}) + (delta + shift), ad::reshape(gamma, {f, 1, 3}));
}

BodyOutput body_forward(const BodyTemplate& t, const BodyParams& params) {
  const Kinematics k = forward_kinematics(t, params);
  return {k.joints, skin_vertices(t, k, params.beta, params.gamma)};
}

}  // namespace mmbat::body
