#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

namespace mmbat::net {

struct SetAbstractionConfig {
  std::size_t sample_divisor = 4;  // k = max(1, N / sample_divisor)
  double radius = 0.2;             // meters
  std::size_t group_size = 16;     // max points per ball
  std::vector<std::size_t> mlp{64, 128};

  bool operator==(const SetAbstractionConfig&) const = default;
};

/// Multipliers applied to each loss term before summation.
struct LossScales {
  double pred = 1.0;
  double joint = 1.0;
  double theta = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double joints = 1.0;    // l_J
  double vertices = 1.0;  // l_M

  bool operator==(const LossScales&) const = default;
};

struct NetConfig {
  std::size_t window = 8;    // T
  std::size_t points = 1024; // N
  std::size_t channels = 5;  // C
  std::size_t n_joints = 24;
  std::size_t n_shape = 10;

  std::vector<SetAbstractionConfig> sa_stages{{4, 0.2, 16, {64, 128}}, {16, 0.4, 16, {128, 256}}};
  std::vector<std::size_t> global_mlp{512};  // last width is D_f
  std::size_t gru_hidden = 512;              // per direction; G has 2x this width
  std::vector<std::size_t> translation_hidden{512, 128};
  std::vector<std::size_t> skeleton_hidden{512};
  std::size_t fusion_width = 1024;
  std::size_t heads = 8;
  std::vector<std::size_t> pose_hidden{256};
  std::vector<std::size_t> shape_hidden{256};  // beta and gamma heads
  double dropout = 0.2;

  std::array<double, 3> box{1.0, 1.0, 3.0};  // crop extents along x, y, z
  LossScales loss_scales{};
  std::uint64_t init_seed = 0;

  std::size_t feature_width() const { return global_mlp.back(); }  // D_f
  std::size_t global_width() const { return 2 * gru_hidden; }      // width of G
  std::size_t head_dim() const { return fusion_width / heads; }

  /// Throws ConfigError on inconsistent settings (e.g. heads not dividing the
  /// fusion width).
  void validate() const;

  bool operator==(const NetConfig&) const = default;
};

void to_json(nlohmann::json& j, const SetAbstractionConfig& c);
void from_json(const nlohmann::json& j, SetAbstractionConfig& c);
void to_json(nlohmann::json& j, const LossScales& c);
void from_json(const nlohmann::json& j, LossScales& c);
void to_json(nlohmann::json& j, const NetConfig& c);
void from_json(const nlohmann::json& j, NetConfig& c);

}  // namespace mmbat::net
