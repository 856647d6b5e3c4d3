#include "mmbat/body/body_template.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mmbat/errors.hpp"
#include "mmbat/util/json_config.hpp"

namespace mmbat::body {

namespace {

struct JointSpec {
  const char* name;
  int parent;
  double x, y, z;
};

// SMPL joint layout, rest pose with arms hanging down.
constexpr JointSpec kSmpl24[] = {
    {"pelvis", -1, 0.0, 0.0, 0.0},           {"left_hip", 0, 0.09, 0.0, -0.08},
    {"right_hip", 0, -0.09, 0.0, -0.08},     {"spine1", 0, 0.0, 0.01, 0.11},
    {"left_knee", 1, 0.10, 0.0, -0.46},      {"right_knee", 2, -0.10, 0.0, -0.46},
    {"spine2", 3, 0.0, 0.01, 0.24},          {"left_ankle", 4, 0.10, 0.02, -0.86},
    {"right_ankle", 5, -0.10, 0.02, -0.86},  {"spine3", 6, 0.0, 0.0, 0.30},
    {"left_foot", 7, 0.11, -0.10, -0.92},    {"right_foot", 8, -0.11, -0.10, -0.92},
    {"neck", 9, 0.0, 0.01, 0.52},            {"left_collar", 9, 0.07, 0.01, 0.44},
    {"right_collar", 9, -0.07, 0.01, 0.44},  {"head", 12, 0.0, -0.02, 0.62},
    {"left_shoulder", 13, 0.18, 0.01, 0.46}, {"right_shoulder", 14, -0.18, 0.01, 0.46},
    {"left_elbow", 16, 0.21, 0.02, 0.20},    {"right_elbow", 17, -0.21, 0.02, 0.20},
    {"left_wrist", 18, 0.23, 0.0, -0.04},    {"right_wrist", 19, -0.23, 0.0, -0.04},
    {"left_hand", 20, 0.24, -0.01, -0.12},   {"right_hand", 21, -0.24, -0.01, -0.12},
};

// Human3.6M-style 17-joint layout.
constexpr JointSpec kH36m17[] = {
    {"pelvis", -1, 0.0, 0.0, 0.0},           {"right_hip", 0, -0.10, 0.0, -0.08},
    {"right_knee", 1, -0.10, 0.0, -0.46},    {"right_ankle", 2, -0.10, 0.02, -0.86},
    {"left_hip", 0, 0.10, 0.0, -0.08},       {"left_knee", 4, 0.10, 0.0, -0.46},
    {"left_ankle", 5, 0.10, 0.02, -0.86},    {"spine", 0, 0.0, 0.01, 0.22},
    {"thorax", 7, 0.0, 0.01, 0.45},          {"neck", 8, 0.0, 0.0, 0.52},
    {"head", 9, 0.0, -0.02, 0.65},           {"left_shoulder", 8, 0.18, 0.01, 0.46},
    {"left_elbow", 11, 0.21, 0.02, 0.20},    {"left_wrist", 12, 0.23, 0.0, -0.04},
    {"right_shoulder", 8, -0.18, 0.01, 0.46}, {"right_elbow", 14, -0.21, 0.02, 0.20},
    {"right_wrist", 15, -0.23, 0.0, -0.04},
};

constexpr JointSpec kMicro4[] = {
    {"pelvis", -1, 0.0, 0.0, 0.0},
    {"spine", 0, 0.0, 0.0, 0.30},
    {"head", 1, 0.0, 0.0, 0.60},
    {"leg", 0, 0.0, 0.0, -0.80},
};

bool has(const std::string& s, const char* part) { return s.find(part) != std::string::npos; }

// Capsule radius of the segment ending at the named joint.
double segment_radius(const std::string& n) {
  if (has(n, "head")) return 0.05;
  if (has(n, "spine") || has(n, "thorax")) return 0.12;
  if (has(n, "hip")) return 0.10;
  if (has(n, "knee")) return 0.075;
  if (has(n, "ankle")) return 0.05;
  if (has(n, "foot")) return 0.04;
  if (has(n, "neck")) return 0.055;
  if (has(n, "collar")) return 0.06;
  if (has(n, "shoulder")) return 0.05;
  if (has(n, "elbow")) return 0.045;
  if (has(n, "wrist")) return 0.037;
  if (has(n, "hand")) return 0.03;
  if (has(n, "leg")) return 0.08;
  return 0.05;
}

double cap_radius(const std::string& n) {
  if (has(n, "head")) return 0.10;
  if (has(n, "hand") || has(n, "wrist") || has(n, "foot") || has(n, "ankle")) return 0.045;
  return 0.05;
}

enum class BoneGroup { leg, arm, torso, other };

BoneGroup bone_group(const std::string& n) {
  if (has(n, "knee") || has(n, "ankle") || has(n, "foot") || has(n, "leg")) return BoneGroup::leg;
  if (has(n, "shoulder") || has(n, "elbow") || has(n, "wrist") || has(n, "hand")) return BoneGroup::arm;
  if (has(n, "spine") || has(n, "thorax") || has(n, "neck") || has(n, "head") || has(n, "collar")) {
    return BoneGroup::torso;
  }
  return BoneGroup::other;
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Mesh part: either a capsule around segment parent(j) -> j or a cap around leaf j.
struct Part {
  std::size_t joint;
  bool is_cap;
  double area;
};

std::vector<std::size_t> allocate(const std::vector<Part>& parts, std::size_t total) {
  double sum = 0.0;
  for (const auto& p : parts) sum += p.area;
  std::vector<std::size_t> count(parts.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double exact = static_cast<double>(total) * parts[i].area / sum;
    count[i] = static_cast<std::size_t>(std::floor(exact));
    used += count[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) count[remainders[k % remainders.size()].second] += 1;
  return count;
}

Eigen::Vector3d any_perpendicular(const Eigen::Vector3d& d) {
  const Eigen::Vector3d helper = std::fabs(d.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  return d.cross(helper).normalized();
}

}  // namespace

void BodyTemplate::validate() const {
  if (n_joints < 1) throw ContractError("body template needs at least one joint");
  if (parent.size() != n_joints || joint_names.size() != n_joints || rest_joints.size() != n_joints * 3 ||
      rest_vertices.size() != n_vertices * 3 || skin_weights.size() != n_vertices * n_joints ||
      shape_dirs_joints.size() != n_shape * n_joints * 3 || shape_dirs_vertices.size() != n_shape * n_vertices * 3) {
    throw DimensionError("body template arrays do not match its declared extents");
  }
  if (parent[0] != -1) throw ContractError("joint 0 must be the root");
  for (std::size_t j = 1; j < n_joints; ++j) {
    if (parent[j] < 0 || static_cast<std::size_t>(parent[j]) >= j) {
      throw ContractError("joint " + std::to_string(j) + " must have a parent with a lower index");
    }
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(rest_joints) || !finite(rest_vertices) || !finite(shape_dirs_joints) || !finite(shape_dirs_vertices)) {
    throw ContractError("body template contains non-finite values");
  }
  for (std::size_t v = 0; v < n_vertices; ++v) {
    double s = 0.0;
    int nonzero = 0;
    for (std::size_t j = 0; j < n_joints; ++j) {
      const double w = skin_weights[v * n_joints + j];
      if (!(w >= 0.0)) throw ContractError("negative skin weight at vertex " + std::to_string(v));
      s += w;
      nonzero += w > 0.0;
    }
    if (std::fabs(s - 1.0) > 1e-9 || nonzero > 4) {
      throw ContractError("skin weights of vertex " + std::to_string(v) + " must sum to 1 with at most 4 bones");
    }
  }
}

BodyTemplate make_template(std::size_t n_joints, std::size_t n_vertices, std::size_t n_shape, std::uint64_t seed) {
  std::span<const JointSpec> specs;
  switch (n_joints) {
    case 24: specs = kSmpl24; break;
    case 17: specs = kH36m17; break;
    case 4: specs = kMicro4; break;
    default:
      throw ConfigError("no built-in body topology with " + std::to_string(n_joints) +
                        " joints (supported: 24, 17, 4)");
  }
  if (n_vertices < 1) throw ConfigError("body template needs at least one vertex");

  BodyTemplate t;
  t.n_joints = n_joints;
  t.n_vertices = n_vertices;
  t.n_shape = n_shape;
  std::vector<Eigen::Vector3d> J(n_joints);
  std::vector<bool> is_leaf(n_joints, true);
  for (std::size_t j = 0; j < n_joints; ++j) {
    t.parent.push_back(specs[j].parent);
    t.joint_names.emplace_back(specs[j].name);
    J[j] = Eigen::Vector3d(specs[j].x, specs[j].y, specs[j].z);
    t.rest_joints.insert(t.rest_joints.end(), {specs[j].x, specs[j].y, specs[j].z});
    if (specs[j].parent >= 0) is_leaf[static_cast<std::size_t>(specs[j].parent)] = false;
  }

  std::vector<Part> parts;
  for (std::size_t j = 1; j < n_joints; ++j) {
    const double len = (J[j] - J[static_cast<std::size_t>(t.parent[j])]).norm();
    parts.push_back({j, false, 2.0 * std::numbers::pi * segment_radius(t.joint_names[j]) * len});
  }
  for (std::size_t j = 1; j < n_joints; ++j) {
    if (!is_leaf[j]) continue;
    const double r = cap_radius(t.joint_names[j]);
    parts.push_back({j, true, 2.0 * std::numbers::pi * r * r});
  }
  const auto counts = allocate(parts, n_vertices);

  // Per-bone length scaling for each shape direction, plus a girth term.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> bone_scale(n_shape, std::vector<double>(n_joints, 0.0));
  std::vector<double> girth(n_shape, 0.0);
  for (std::size_t k = 0; k < n_shape; ++k) {
    for (std::size_t j = 1; j < n_joints; ++j) {
      const BoneGroup g = bone_group(t.joint_names[j]);
      switch (k) {
        case 0: bone_scale[k][j] = 0.04; break;
        case 1: bone_scale[k][j] = g == BoneGroup::leg ? 0.06 : 0.0; break;
        case 2: bone_scale[k][j] = g == BoneGroup::arm ? 0.06 : 0.0; break;
        case 3: break;
        case 4: bone_scale[k][j] = g == BoneGroup::torso ? 0.05 : 0.0; break;
        default: bone_scale[k][j] = 0.02 * gauss(rng); break;
      }
    }
    girth[k] = k == 3 ? 0.02 : (k >= 5 ? 0.005 * gauss(rng) : 0.0);
  }
  std::vector<std::vector<Eigen::Vector3d>> joint_delta(n_shape, std::vector<Eigen::Vector3d>(n_joints));
  for (std::size_t k = 0; k < n_shape; ++k) {
    joint_delta[k][0].setZero();
    for (std::size_t j = 1; j < n_joints; ++j) {
      const auto p = static_cast<std::size_t>(t.parent[j]);
      joint_delta[k][j] = joint_delta[k][p] + bone_scale[k][j] * (J[j] - J[p]);
    }
  }
  t.shape_dirs_joints.assign(n_shape * n_joints * 3, 0.0);
  for (std::size_t k = 0; k < n_shape; ++k) {
    for (std::size_t j = 0; j < n_joints; ++j) {
      for (int c = 0; c < 3; ++c) t.shape_dirs_joints[(k * n_joints + j) * 3 + c] = joint_delta[k][j][c];
    }
  }

  t.rest_vertices.reserve(n_vertices * 3);
  t.skin_weights.assign(n_vertices * n_joints, 0.0);
  t.shape_dirs_vertices.assign(n_shape * n_vertices * 3, 0.0);
  std::size_t v = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const std::size_t j = parts[pi].joint;
    const auto p = static_cast<std::size_t>(t.parent[j]);
    const Eigen::Vector3d axis = J[j] - J[p];
    const Eigen::Vector3d d = axis.normalized();
    const Eigen::Vector3d e1 = any_perpendicular(d);
    const Eigen::Vector3d e2 = d.cross(e1);
    for (std::size_t c = 0; c < counts[pi]; ++c, ++v) {
      Eigen::Vector3d pos, radial;
      double* w = t.skin_weights.data() + v * n_joints;
      double seg_t = 1.0;
      if (parts[pi].is_cap) {
        const double r = cap_radius(t.joint_names[j]);
        Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
        dir.normalize();
        radial = dir;
        pos = J[j] + 0.6 * r * d + r * dir;
        w[j] = 1.0;
      } else {
        const double r = segment_radius(t.joint_names[j]);
        seg_t = unit(rng);
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        radial = std::cos(phi) * e1 + std::sin(phi) * e2;
        pos = J[p] + seg_t * axis + r * radial;
        const double w_child = 0.5 * smoothstep((seg_t - 0.75) / 0.25);
        const double w_grand = t.parent[p] >= 0 ? 0.5 * smoothstep((0.25 - seg_t) / 0.25) : 0.0;
        w[j] += w_child;
        if (t.parent[p] >= 0) w[static_cast<std::size_t>(t.parent[p])] += w_grand;
        w[p] += 1.0 - w_child - w_grand;
      }
      t.rest_vertices.insert(t.rest_vertices.end(), {pos.x(), pos.y(), pos.z()});
      for (std::size_t k = 0; k < n_shape; ++k) {
        const Eigen::Vector3d delta = parts[pi].is_cap
                                          ? Eigen::Vector3d(joint_delta[k][j] + girth[k] * radial)
                                          : Eigen::Vector3d((1.0 - seg_t) * joint_delta[k][p] +
                                                            seg_t * joint_delta[k][j] + girth[k] * radial);
        for (int cc = 0; cc < 3; ++cc) t.shape_dirs_vertices[(k * n_vertices + v) * 3 + cc] = delta[cc];
      }
    }
  }
  t.validate();
  return t;
}

BodyTemplate make_template(const TemplateConfig& config) {
  return make_template(config.n_joints, config.n_vertices, config.n_shape, config.seed);
}

nlohmann::json template_to_json(const BodyTemplate& t) {
  return {
      {"format", "mmbat-body-template"},
      {"version", 1},
      {"n_joints", t.n_joints},
      {"n_vertices", t.n_vertices},
      {"n_shape", t.n_shape},
      {"parent", t.parent},
      {"joint_names", t.joint_names},
      {"rest_joints", t.rest_joints},
      {"rest_vertices", t.rest_vertices},
      {"skin_weights", t.skin_weights},
      {"shape_dirs_joints", t.shape_dirs_joints},
      {"shape_dirs_vertices", t.shape_dirs_vertices},
  };
}

BodyTemplate template_from_json(const nlohmann::json& j) {
  util::require_known_keys(j,
                           {"format", "version", "n_joints", "n_vertices", "n_shape", "parent", "joint_names",
                            "rest_joints", "rest_vertices", "skin_weights", "shape_dirs_joints",
                            "shape_dirs_vertices"},
                           "body template");
  if (j.value("format", "") != "mmbat-body-template" || j.value("version", 0) != 1) {
    throw ConfigError("not a version-1 mmbat body template");
  }
  BodyTemplate t;
  try {
    j.at("n_joints").get_to(t.n_joints);
    j.at("n_vertices").get_to(t.n_vertices);
    j.at("n_shape").get_to(t.n_shape);
    j.at("parent").get_to(t.parent);
    j.at("joint_names").get_to(t.joint_names);
    j.at("rest_joints").get_to(t.rest_joints);
    j.at("rest_vertices").get_to(t.rest_vertices);
    j.at("skin_weights").get_to(t.skin_weights);
    j.at("shape_dirs_joints").get_to(t.shape_dirs_joints);
    j.at("shape_dirs_vertices").get_to(t.shape_dirs_vertices);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed body template: ") + e.what());
  }
  t.validate();
  return t;
}

void save_template(const BodyTemplate& t, const std::filesystem::path& path) {
  util::write_json_file(path, template_to_json(t));
}

BodyTemplate load_template(const std::filesystem::path& path) { return template_from_json(util::read_json_file(path)); }

void to_json(nlohmann::json& j, const TemplateConfig& c) {
  j = {{"n_joints", c.n_joints}, {"n_vertices", c.n_vertices}, {"n_shape", c.n_shape}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TemplateConfig& c) {
  util::require_known_keys(j, {"n_joints", "n_vertices", "n_shape", "seed"}, "template");
  util::read_optional(j, "n_joints", c.n_joints);
  util::read_optional(j, "n_vertices", c.n_vertices);
  util::read_optional(j, "n_shape", c.n_shape);
  util::read_optional(j, "seed", c.seed);
}

}  // namespace mmbat::body
