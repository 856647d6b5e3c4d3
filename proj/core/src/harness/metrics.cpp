#include "mmbat/harness/metrics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "mmbat/body/rotation.hpp"
#include "mmbat/errors.hpp"

namespace mmbat::harness {
namespace {

constexpr double kCm = 100.0;
constexpr double kDeg = 180.0 / std::numbers::pi;

void require_same(const ad::Tensor& a, const ad::Tensor& b, const char* what) {
  if (!a.defined() || !b.defined() || a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": prediction and ground truth extents differ");
  }
}

// Sum of Euclidean norms over rows of 3; returns the sum and row count.
std::pair<double, std::size_t> point_error_sum(const ad::Tensor& a, const ad::Tensor& b, const char* what) {
  require_same(a, b, what);
  if (a.dim(-1) != 3) throw DimensionError(std::string(what) + " expects [..., 3]");
  const auto av = a.values(), bv = b.values();
  const std::size_t n = av.size() / 3;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = av[i * 3] - bv[i * 3], dy = av[i * 3 + 1] - bv[i * 3 + 1], dz = av[i * 3 + 2] - bv[i * 3 + 2];
    s += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return {s, n};
}

std::pair<double, std::size_t> rotation_error_sum(const ad::Tensor& a, const ad::Tensor& b) {
  require_same(a, b, "mpjre");
  if (a.rank() < 2 || a.dim(-1) != 3 || a.dim(-2) != 3) throw DimensionError("mpjre expects [..., 3, 3]");
  const auto av = a.values(), bv = b.values();
  const std::size_t n = av.size() / 9;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> ra(av.data() + i * 9), rb(bv.data() + i * 9);
    s += body::geodesic_distance(Eigen::Matrix3d(ra), Eigen::Matrix3d(rb));
  }
  return {s, n};
}

ad::Tensor root_rows(const ad::Tensor& joints) {
  if (joints.rank() != 3 || joints.dim(2) != 3) throw DimensionError("mte expects joints [F, NJ, 3]");
  const std::size_t f = joints.dim(0), nj = joints.dim(1);
  std::vector<double> v(f * 3);
  for (std::size_t i = 0; i < f; ++i) {
    for (int a = 0; a < 3; ++a) v[i * 3 + a] = joints.at(i * nj * 3 + a);
  }
  return ad::Tensor::from({f, 3}, std::move(v));
}

double mean_or_zero(double s, std::size_t n) { return n == 0 ? 0.0 : s / static_cast<double>(n); }

}  // namespace

double metric_mpjre(const ad::Tensor& p, const ad::Tensor& t) {
  const auto [s, n] = rotation_error_sum(p, t);
  return mean_or_zero(s, n) * kDeg;
}

double metric_mpjpe(const ad::Tensor& p, const ad::Tensor& t) {
  const auto [s, n] = point_error_sum(p, t, "mpjpe");
  return mean_or_zero(s, n) * kCm;
}

double metric_mpvpe(const ad::Tensor& p, const ad::Tensor& t) {
  const auto [s, n] = point_error_sum(p, t, "mpvpe");
  return mean_or_zero(s, n) * kCm;
}

double metric_mte(const ad::Tensor& p, const ad::Tensor& t) {
  require_same(p, t, "mte");
  const auto [s, n] = point_error_sum(root_rows(p), root_rows(t), "mte");
  return mean_or_zero(s, n) * kCm;
}

double metric_mpte(const ad::Tensor& p, const ad::Tensor& t) {
  const auto [s, n] = point_error_sum(p, t, "mpte");
  return mean_or_zero(s, n) * kCm;
}

MetricSums& MetricSums::operator+=(const MetricSums& o) {
  rotation_deg += o.rotation_deg;
  joint_cm += o.joint_cm;
  vertex_cm += o.vertex_cm;
  root_cm += o.root_cm;
  translation_cm += o.translation_cm;
  rotations += o.rotations;
  joints += o.joints;
  vertices += o.vertices;
  roots += o.roots;
  translations += o.translations;
  return *this;
}

MetricSums accumulate_body(const ad::Tensor& pred_rot, const ad::Tensor& true_rot, const ad::Tensor& pred_joints,
                           const ad::Tensor& true_joints, const ad::Tensor& pred_vertices,
                           const ad::Tensor& true_vertices) {
  MetricSums m;
  const auto [rs, rn] = rotation_error_sum(pred_rot, true_rot);
  m.rotation_deg = rs * kDeg;
  m.rotations = rn;
  const auto [js, jn] = point_error_sum(pred_joints, true_joints, "mpjpe");
  m.joint_cm = js * kCm;
  m.joints = jn;
  require_same(pred_joints, true_joints, "mte");
  const auto [ts, tn] = point_error_sum(root_rows(pred_joints), root_rows(true_joints), "mte");
  m.root_cm = ts * kCm;
  m.roots = tn;
  if (pred_vertices.defined() && true_vertices.defined()) {
    const auto [vs, vn] = point_error_sum(pred_vertices, true_vertices, "mpvpe");
    m.vertex_cm = vs * kCm;
    m.vertices = vn;
  }
  return m;
}

MetricSums accumulate_translation(const ad::Tensor& pred, const ad::Tensor& truth) {
  MetricSums m;
  const auto [s, n] = point_error_sum(pred, truth, "mpte");
  m.translation_cm = s * kCm;
  m.translations = n;
  return m;
}

MetricValues MetricValues::from_sums(const MetricSums& s, std::size_t frames) {
  MetricValues v;
  v.mpjre = mean_or_zero(s.rotation_deg, s.rotations);
  v.mpjpe = mean_or_zero(s.joint_cm, s.joints);
  if (s.vertices > 0) v.mpvpe = s.vertex_cm / static_cast<double>(s.vertices);
  v.mte = mean_or_zero(s.root_cm, s.roots);
  if (s.translations > 0) v.mpte = s.translation_cm / static_cast<double>(s.translations);
  v.frames = frames;
  return v;
}

nlohmann::json MetricValues::to_json() const {
  nlohmann::json j = {{"mpjre_deg", mpjre}, {"mpjpe_cm", mpjpe}, {"mte_cm", mte}, {"frames", frames}};
  j["mpvpe_cm"] = mpvpe ? nlohmann::json(*mpvpe) : nlohmann::json(nullptr);
  j["mpte_cm"] = mpte ? nlohmann::json(*mpte) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json per = nlohmann::json::object();
  for (const char* key : {"name", "frames", "mpjre_deg", "mpjpe_cm", "mpvpe_cm", "mte_cm", "mpte_cm"}) {
    per[key] = nlohmann::json::array();
  }
  for (const auto& s : sequences) {
    const nlohmann::json v = s.values.to_json();
    per["name"].push_back(s.name);
    for (const char* key : {"frames", "mpjre_deg", "mpjpe_cm", "mpvpe_cm", "mte_cm", "mpte_cm"}) per[key].push_back(v[key]);
  }
  return {
      {"metrics", overall.to_json()},
      {"beta_window_mean", beta_window_mean.to_json()},
      {"per_sequence", per},
      {"crop_mode", crop_mode},
      {"mpjre_joints", "all"},
      {"config_fingerprint", config_fingerprint},
      {"warnings", warnings},
  };
}

}  // namespace mmbat::harness
