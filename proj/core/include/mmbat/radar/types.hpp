#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mmbat/autodiff/tensor.hpp"
#include "mmbat/body/body_model.hpp"

namespace mmbat::radar {

// Radar frame: radar at the origin, x lateral, y depth (boresight), z up.
// Channel order of every point.
enum Channel : std::size_t { kX = 0, kY = 1, kZ = 2, kDoppler = 3, kIntensity = 4 };
inline constexpr std::size_t kDefaultChannels = 5;
inline constexpr std::size_t kMinChannels = 4;

using Vec3 = std::array<double, 3>;

/// One radar scan: `count()` points of `channels` values each, row-major.
struct PointFrame {
  double timestamp = 0.0;
  std::size_t channels = kDefaultChannels;
  std::vector<double> data;

  std::size_t count() const { return channels == 0 ? 0 : data.size() / channels; }
  std::span<const double> point(std::size_t i) const { return {data.data() + i * channels, channels}; }

  bool operator==(const PointFrame&) const = default;
};

/// Per-frame ground truth: body parameters and the resulting joints.
struct GroundTruth {
  body::BodyParams params;  // theta [F, 6NJ], beta [F, NB], gamma [F, 3]
  ad::Tensor joints;        // [F, NJ, 3]

  std::size_t n_joints() const { return joints.dim(1); }
  std::size_t n_shape() const { return params.beta.dim(1); }
};

struct RawSequence {
  std::vector<PointFrame> frames;
  double frame_rate = 10.0;
  std::size_t channels = kDefaultChannels;
  std::optional<GroundTruth> ground_truth;
  std::optional<Vec3> initial_box_center;

  std::size_t size() const { return frames.size(); }
  /// Timestamps strictly increasing, finite coordinates, C >= 4, one ground
  /// truth entry per frame. Throws ContractError otherwise.
  void validate() const;
};

}  // namespace mmbat::radar
