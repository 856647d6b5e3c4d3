#pragma once

#include <array>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mmbat/autodiff/tensor.hpp"

namespace mmbat::body {

/// Margin kept inside [-1, 1] before arccos so the gradient stays finite for
/// coincident rotations.
inline constexpr double kGeodesicClampMargin = 1e-7;
/// Below this norm the Gram-Schmidt step is rejected as degenerate.
inline constexpr double kDegenerateNorm = 1e-8;

/// Gram-Schmidt on two 3-vectors: columns are normalize(a), the normalized
/// component of b orthogonal to it, and their cross product.
Eigen::Matrix3d rot6d_to_matrix(std::span<const double> r6);
/// First two columns of R, the inverse of rot6d_to_matrix up to scale.
std::array<double, 6> matrix_to_rot6d(const Eigen::Matrix3d& rotation);

/// arccos(clamp((tr(A B^T) - 1) / 2)), in radians.
double geodesic_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle);

// Differentiable counterparts on tensors.

/// [..., 6] -> [..., 3, 3]. Throws DegenerateRotationError on near-zero norms.
ad::Tensor rot6d_to_matrix(const ad::Tensor& r6);
/// [..., 3, 3] x [..., 3, 3] -> [...] geodesic angles in radians.
ad::Tensor geodesic_distance(const ad::Tensor& a, const ad::Tensor& b);

}  // namespace mmbat::body
