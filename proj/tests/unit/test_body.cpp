#include <cmath>
#include <numbers>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/body/body_model.hpp"
#include "mmbat/body/body_template.hpp"
#include "mmbat/body/rotation.hpp"
#include "mmbat/errors.hpp"
#include "support.hpp"

using namespace mmbat;
using ad::Tensor;

namespace {

Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  const auto v = test::uniform(4, seed);
  Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
  q.normalize();
  return q.toRotationMatrix();
}

Tensor identity_theta(std::size_t frames, std::size_t joints) {
  std::vector<double> v;
  for (std::size_t i = 0; i < frames * joints; ++i) v.insert(v.end(), {1, 0, 0, 0, 1, 0});
  return Tensor::from({frames, 6 * joints}, v);
}

// Two joints: root at the origin, child one meter along +x.
body::BodyTemplate two_link() {
  body::BodyTemplate t;
  t.n_joints = 2;
  t.n_vertices = 2;
  t.n_shape = 0;
  t.parent = {-1, 0};
  t.joint_names = {"root", "tip"};
  t.rest_joints = {0, 0, 0, 1, 0, 0};
  t.rest_vertices = {0.5, 0, 0, 1.5, 0.2, 0};
  t.skin_weights = {1, 0, 0, 1};
  t.validate();
  return t;
}

}  // namespace

TEST_CASE("template determinism and skin weights") {
  const auto a = body::make_template(24, 600, 10, 3);
  const auto b = body::make_template(24, 600, 10, 3);
  CHECK(a == b);
  for (std::size_t nj : {24, 17, 4}) {
    const auto t = body::make_template(nj, 300, 10, 0);
    CHECK(t.parent[0] == -1);
    for (std::size_t v = 0; v < t.n_vertices; ++v) {
      double s = 0.0;
      int nonzero = 0;
      for (std::size_t j = 0; j < nj; ++j) {
        const double w = t.skin_weights[v * nj + j];
        CHECK(w >= 0.0);
        s += w;
        nonzero += w != 0.0 ? 1 : 0;
      }
      CHECK(std::abs(s - 1.0) < 1e-9);
      CHECK(nonzero <= 4);
    }
    for (std::size_t j = 1; j < nj; ++j) CHECK(t.parent[j] < static_cast<int>(j));
  }
  CHECK_THROWS_AS(body::make_template(5, 100, 10, 0), ConfigError);
}

TEST_CASE("template JSON round trip") {
  const auto t = body::make_template(17, 200, 4, 9);
  CHECK(body::template_from_json(body::template_to_json(t)) == t);
}

TEST_CASE("rot6d canonical and scaled inputs give identity") {
  const double a[6] = {1, 0, 0, 0, 1, 0};
  const double b[6] = {2, 0, 0, 0, 3, 0};
  CHECK((body::rot6d_to_matrix(a) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((body::rot6d_to_matrix(b) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  const double zero[6] = {0, 0, 0, 0, 1, 0};
  const double parallel[6] = {1, 0, 0, 2, 0, 0};
  CHECK_THROWS_AS(body::rot6d_to_matrix(zero), DegenerateRotationError);
  CHECK_THROWS_AS(body::rot6d_to_matrix(parallel), DegenerateRotationError);
}

TEST_CASE("rot6d orthonormality and scale invariance over random inputs") {
  const auto v = test::uniform(6 * 10000, 5);
  const auto c = test::uniform(10000, 6, 0.1, 10.0);
  double worst_orth = 0.0, worst_det = 0.0, worst_scale = 0.0;
  for (std::size_t i = 0; i < 10000; ++i) {
    const std::span<const double> r6(v.data() + 6 * i, 6);
    const Eigen::Matrix3d r = body::rot6d_to_matrix(r6);
    worst_orth = std::max(worst_orth, (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    worst_det = std::max(worst_det, std::abs(r.determinant() - 1.0));
    double scaled[6];
    for (int k = 0; k < 6; ++k) scaled[k] = c[i] * r6[k];
    worst_scale = std::max(worst_scale, (body::rot6d_to_matrix(scaled) - r).cwiseAbs().maxCoeff());
  }
  CHECK(worst_orth < 1e-9);
  CHECK(worst_det < 1e-9);
  CHECK(worst_scale < 1e-10);
}

TEST_CASE("matrix_to_rot6d inverts rot6d_to_matrix") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Eigen::Matrix3d r = random_rotation(s);
    const auto r6 = body::matrix_to_rot6d(r);
    CHECK((body::rot6d_to_matrix(r6) - r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tensor rot6d matches the Eigen path and has sound gradients") {
  const auto r6 = test::random_tensor({3, 6}, 7);
  const auto m = body::rot6d_to_matrix(r6);
  REQUIRE(m.shape() == ad::Shape{3, 3, 3});
  for (std::size_t i = 0; i < 3; ++i) {
    const Eigen::Matrix3d e = body::rot6d_to_matrix(r6.values().subspan(6 * i, 6));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) CHECK(std::abs(m.at(9 * i + 3 * r + c) - e(r, c)) < 1e-14);
  }
  const auto w = test::random_tensor({3, 3, 3}, 8, false);
  CHECK(test::gradient_error([w](const auto& in) { return ad::sum(ad::mul(body::rot6d_to_matrix(in[0]), w)); }, {r6}) <
        1e-4);
}

TEST_CASE("geodesic distance cases and quaternion oracle") {
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
  CHECK(body::geodesic_distance(eye, eye) < 1e-3);
  const Eigen::Matrix3d rz = body::axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 2);
  CHECK(std::abs(body::geodesic_distance(rz, eye) - std::numbers::pi / 2) < 1e-12);

  for (std::uint64_t s = 0; s < 200; ++s) {
    const Eigen::Matrix3d a = random_rotation(2 * s);
    const Eigen::Matrix3d b = random_rotation(2 * s + 1);
    const Eigen::Quaterniond q(a * b.transpose());
    const double oracle = 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
    const double d = body::geodesic_distance(a, b);
    CHECK(std::abs(d - oracle) < 1e-6);
    CHECK(std::abs(d - body::geodesic_distance(b, a)) < 1e-12);
    CHECK(d <= std::numbers::pi);
    CHECK(d >= 0.0);
    CHECK(body::geodesic_distance(a, a) < 1e-3);
  }
}

TEST_CASE("tensor geodesic distance matches the Eigen path") {
  const Eigen::Matrix3d a = random_rotation(11), b = random_rotation(12);
  std::vector<double> va, vb;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      va.push_back(a(r, c));
      vb.push_back(b(r, c));
    }
  const auto d = body::geodesic_distance(Tensor::from({1, 3, 3}, va), Tensor::from({1, 3, 3}, vb));
  CHECK(std::abs(d.at(0) - body::geodesic_distance(a, b)) < 1e-12);
}

TEST_CASE("forward kinematics rest pose and translation") {
  const auto t = body::make_template(24, 400, 10, 1);
  auto p = body::rest_params(t, 2);
  const auto out = body::body_forward(t, p);
  CHECK(test::max_abs_diff(out.joints.values().subspan(0, 72), t.rest_joints) == 0.0);
  CHECK(test::max_abs_diff(out.vertices.values().subspan(0, 1200), t.rest_vertices) < 1e-12);

  p.gamma = Tensor::from({2, 3}, {1, 2, 3, 1, 2, 3});
  const auto moved = body::body_forward(t, p);
  for (std::size_t i = 0; i < out.joints.numel(); ++i) {
    CHECK(moved.joints.at(i) == doctest::Approx(out.joints.at(i) + static_cast<double>(i % 3 + 1)).epsilon(1e-14));
  }
  auto bad = p;
  bad.beta = Tensor::zeros({2, 9});
  CHECK_THROWS_AS(body::body_forward(t, bad), DimensionError);
}

TEST_CASE("translation equivariance at random poses") {
  const auto t = body::make_template(24, 300, 10, 2);
  body::BodyParams p{test::random_tensor({3, 144}, 20, false), test::random_tensor({3, 10}, 21, false),
                     test::random_tensor({3, 3}, 22, false)};
  const auto delta = test::uniform(3, 23, -5.0, 5.0);
  auto q = p;
  std::vector<double> g(p.gamma.values().begin(), p.gamma.values().end());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i % 3];
  q.gamma = Tensor::from({3, 3}, g);
  const auto a = body::body_forward(t, p), b = body::body_forward(t, q);
  for (std::size_t i = 0; i < a.joints.numel(); ++i) CHECK(std::abs(b.joints.at(i) - a.joints.at(i) - delta[i % 3]) < 1e-12);
  for (std::size_t i = 0; i < a.vertices.numel(); ++i)
    CHECK(std::abs(b.vertices.at(i) - a.vertices.at(i) - delta[i % 3]) < 1e-12);
}

TEST_CASE("zero shape space ignores beta") {
  const auto t = body::make_template(4, 100, 0, 0);
  body::BodyParams p{test::random_tensor({1, 24}, 30, false), Tensor::zeros({1, 0}), test::random_tensor({1, 3}, 31, false)};
  CHECK(body::body_forward(t, p).joints.numel() == 12);
}

TEST_CASE("two-link chain with a quarter turn about z") {
  const auto t = two_link();
  const Eigen::Matrix3d rz = body::axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 2);
  const auto r6 = body::matrix_to_rot6d(rz);
  std::vector<double> theta(r6.begin(), r6.end());
  theta.insert(theta.end(), {1, 0, 0, 0, 1, 0});
  body::BodyParams p{Tensor::from({1, 12}, theta), Tensor::zeros({1, 0}), Tensor::zeros({1, 3})};
  const auto out = body::body_forward(t, p);
  const Eigen::Vector3d child = rz * Eigen::Vector3d(1, 0, 0);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(out.joints.at(3 + k) - child[k]) < 1e-12);
  // Vertex 1 has weight 1 on the tip bone and moves rigidly with it.
  const Eigen::Vector3d v1 = rz * Eigen::Vector3d(1.5, 0.2, 0);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(out.vertices.at(3 + k) - v1[k]) < 1e-12);
}

TEST_CASE("rigid bone and global rotation of the skin") {
  const auto t = body::make_template(24, 400, 10, 4);
  auto p = body::rest_params(t, 1);
  const auto rest = body::body_forward(t, p);
  const Eigen::Matrix3d r = random_rotation(40);
  const auto r6 = body::matrix_to_rot6d(r);
  std::vector<double> theta(p.theta.values().begin(), p.theta.values().end());
  std::copy(r6.begin(), r6.end(), theta.begin());
  p.theta = Tensor::from({1, 144}, theta);
  const auto rotated = body::body_forward(t, p);
  for (std::size_t v = 0; v < t.n_vertices; ++v) {
    const Eigen::Vector3d x(rest.vertices.at(3 * v), rest.vertices.at(3 * v + 1), rest.vertices.at(3 * v + 2));
    const Eigen::Vector3d y = r * x;
    for (int k = 0; k < 3; ++k) CHECK(std::abs(rotated.vertices.at(3 * v + k) - y[k]) < 1e-9);
  }
}

TEST_CASE("joint and vertex gradients match finite differences") {
  const auto t = body::make_template(4, 60, 3, 5);
  auto theta = identity_theta(2, 4);
  const auto noise = test::uniform(theta.numel(), 50, -0.3, 0.3);
  std::vector<double> th(theta.values().begin(), theta.values().end());
  for (std::size_t i = 0; i < th.size(); ++i) th[i] += noise[i];
  const auto wj = test::random_tensor({2, 4, 3}, 51, false);
  const auto wv = test::random_tensor({2, 60, 3}, 52, false);
  auto f = [&](const std::vector<Tensor>& in) {
    const auto out = body::body_forward(t, {in[0], in[1], in[2]});
    return ad::add(ad::sum(ad::mul(out.joints, wj)), ad::sum(ad::mul(out.vertices, wv)));
  };
  CHECK(test::gradient_error(f, {Tensor::from({2, 24}, th, true), test::random_tensor({2, 3}, 53),
                                 test::random_tensor({2, 3}, 54)}) < 1e-4);
}
