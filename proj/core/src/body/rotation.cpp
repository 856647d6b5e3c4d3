#include "mmbat/body/rotation.hpp"

#include <algorithm>
#include <cmath>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::body {

using ad::Tensor;

Eigen::Matrix3d rot6d_to_matrix(std::span<const double> r6) {
  if (r6.size() != 6) throw DimensionError("rot6d_to_matrix: expected 6 values, got " + std::to_string(r6.size()));
  const Eigen::Vector3d a(r6[0], r6[1], r6[2]);
  const Eigen::Vector3d b(r6[3], r6[4], r6[5]);
  const double na = a.norm();
  if (!(na >= kDegenerateNorm)) throw DegenerateRotationError("rot6d_to_matrix: first column has near-zero norm");
  const Eigen::Vector3d c1 = a / na;
  const Eigen::Vector3d u = b - c1.dot(b) * c1;
  const double nu = u.norm();
  if (!(nu >= kDegenerateNorm)) {
    throw DegenerateRotationError("rot6d_to_matrix: second column is parallel to the first");
  }
  const Eigen::Vector3d c2 = u / nu;
  Eigen::Matrix3d r;
  r.col(0) = c1;
  r.col(1) = c2;
  r.col(2) = c1.cross(c2);
  return r;
}

std::array<double, 6> matrix_to_rot6d(const Eigen::Matrix3d& rotation) {
  return {rotation(0, 0), rotation(1, 0), rotation(2, 0), rotation(0, 1), rotation(1, 1), rotation(2, 1)};
}

double geodesic_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double c = ((a * b.transpose()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0 + kGeodesicClampMargin, 1.0 - kGeodesicClampMargin));
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

namespace {

Tensor component(const Tensor& v, std::size_t i) { return ad::slice(v, -1, i, 1); }

Tensor cross(const Tensor& a, const Tensor& b) {
  const Tensor ax = component(a, 0), ay = component(a, 1), az = component(a, 2);
  const Tensor bx = component(b, 0), by = component(b, 1), bz = component(b, 2);
  return ad::concat_last_axis({ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx});
}

Tensor norm_last(const Tensor& v) { return ad::sqrt(ad::sum_axis(ad::square(v), -1, true)); }

void check_norms(const Tensor& n, const char* what) {
  for (double x : n.values()) {
    if (!(x >= kDegenerateNorm)) throw DegenerateRotationError(std::string("rot6d_to_matrix: ") + what);
  }
}

}  // namespace

Tensor rot6d_to_matrix(const Tensor& r6) {
  if (r6.rank() < 1 || r6.dim(-1) != 6) {
    throw DimensionError("rot6d_to_matrix: trailing extent must be 6, got shape " + ad::shape_str(r6.shape()));
  }
  const Tensor a = ad::slice(r6, -1, 0, 3);
  const Tensor b = ad::slice(r6, -1, 3, 3);
  const Tensor na = norm_last(a);
  check_norms(na, "first column has near-zero norm");
  const Tensor c1 = a / na;
  const Tensor u = b - ad::sum_axis(c1 * b, -1, true) * c1;
  const Tensor nu = norm_last(u);
  check_norms(nu, "second column is parallel to the first");
  const Tensor c2 = u / nu;
  const Tensor c3 = cross(c1, c2);

  ad::Shape col_shape = r6.shape();
  col_shape.back() = 3;
  ad::Shape row_shape = col_shape;
  row_shape.insert(row_shape.end() - 1, 1);
  // Stack the columns as rows of [..., 3(col), 3(row)], then transpose.
  const Tensor stacked = ad::concat({ad::reshape(c1, row_shape), ad::reshape(c2, row_shape), ad::reshape(c3, row_shape)}, -2);
  return ad::transpose_last2(stacked);
}

Tensor geodesic_distance(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape() || a.rank() < 2 || a.dim(-1) != 3 || a.dim(-2) != 3) {
    throw DimensionError("geodesic_distance: shapes " + ad::shape_str(a.shape()) + " and " +
                         ad::shape_str(b.shape()) + " are not matching [..., 3, 3]");
  }
  // tr(A B^T) is the elementwise inner product of A and B.
  const Tensor tr = ad::sum_axis(ad::sum_axis(a * b, -1), -1);
  const Tensor c = ad::scale(ad::add_scalar(tr, -1.0), 0.5);
  return ad::acos_clamped(c, -1.0 + kGeodesicClampMargin, 1.0 - kGeodesicClampMargin);
}

}  // namespace mmbat::body
