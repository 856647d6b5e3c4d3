#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mmbat::body {

/// Procedural stand-in for an SMPL-style body asset: kinematic tree, rest
/// skeleton, capsule mesh with linear-blend weights, and linear shape space.
///
/// Layout conventions (all row-major, meters, z up, body facing -y):
///   rest_joints         n_joints x 3, root at the origin
///   rest_vertices       n_vertices x 3
///   skin_weights        n_vertices x n_joints
///   shape_dirs_joints   n_shape x (n_joints * 3)
///   shape_dirs_vertices n_shape x (n_vertices * 3)
/// Parents always precede children, so index order is a valid traversal order.
struct BodyTemplate {
  std::size_t n_joints = 0;
  std::size_t n_vertices = 0;
  std::size_t n_shape = 0;
  std::vector<int> parent;  // -1 for the root
  std::vector<std::string> joint_names;
  std::vector<double> rest_joints;
  std::vector<double> rest_vertices;
  std::vector<double> skin_weights;
  std::vector<double> shape_dirs_joints;
  std::vector<double> shape_dirs_vertices;

  /// Throws DimensionError / ContractError when an invariant does not hold.
  void validate() const;

  bool operator==(const BodyTemplate&) const = default;
};

struct TemplateConfig {
  std::size_t n_joints = 24;
  std::size_t n_vertices = 600;
  std::size_t n_shape = 10;
  std::uint64_t seed = 0;

  bool operator==(const TemplateConfig&) const = default;
};

/// Built-in topologies: 24 joints (SMPL layout), 17 joints (Human3.6M-style
/// layout used by 17-joint datasets), 4 joints (micro skeleton for tests).
/// Any other count raises ConfigError.
BodyTemplate make_template(std::size_t n_joints, std::size_t n_vertices, std::size_t n_shape, std::uint64_t seed);
BodyTemplate make_template(const TemplateConfig& config);

nlohmann::json template_to_json(const BodyTemplate& t);
BodyTemplate template_from_json(const nlohmann::json& j);
void save_template(const BodyTemplate& t, const std::filesystem::path& path);
BodyTemplate load_template(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const TemplateConfig& c);
void from_json(const nlohmann::json& j, TemplateConfig& c);

}  // namespace mmbat::body
