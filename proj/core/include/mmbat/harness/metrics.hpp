#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmbat/autodiff/tensor.hpp"

namespace mmbat::harness {

// Each metric compares equally shaped tensors and throws DimensionError
// otherwise. Distances are reported in centimeters, angles in degrees.

/// Mean geodesic angle over per-joint rotation matrices [..., 3, 3].
double metric_mpjre(const ad::Tensor& pred_rotations, const ad::Tensor& true_rotations);
/// Mean Euclidean joint error over [..., 3].
double metric_mpjpe(const ad::Tensor& pred_joints, const ad::Tensor& true_joints);
/// Mean Euclidean vertex error over [..., 3].
double metric_mpvpe(const ad::Tensor& pred_vertices, const ad::Tensor& true_vertices);
/// Mean root-joint (joint 0) error over joints [F, NJ, 3].
double metric_mte(const ad::Tensor& pred_joints, const ad::Tensor& true_joints);
/// Mean error between predicted and true root translations [..., 3].
double metric_mpte(const ad::Tensor& pred_translation, const ad::Tensor& true_translation);

/// Running sums so that overall values are frame-weighted means.
struct MetricSums {
  double rotation_deg = 0.0;
  double joint_cm = 0.0;
  double vertex_cm = 0.0;
  double root_cm = 0.0;
  double translation_cm = 0.0;
  std::size_t rotations = 0, joints = 0, vertices = 0, roots = 0, translations = 0;

  MetricSums& operator+=(const MetricSums& o);
};

struct MetricValues {
  double mpjre = 0.0;
  double mpjpe = 0.0;
  std::optional<double> mpvpe;
  double mte = 0.0;
  std::optional<double> mpte;  // needs at least two windows
  std::size_t frames = 0;

  static MetricValues from_sums(const MetricSums& s, std::size_t frames);
  nlohmann::json to_json() const;
};

/// Accumulates per-element errors for one set of frames.
/// rotations [F, NJ, 3, 3], joints [F, NJ, 3], vertices [F, NV, 3] (may be undefined).
MetricSums accumulate_body(const ad::Tensor& pred_rot, const ad::Tensor& true_rot, const ad::Tensor& pred_joints,
                           const ad::Tensor& true_joints, const ad::Tensor& pred_vertices,
                           const ad::Tensor& true_vertices);
MetricSums accumulate_translation(const ad::Tensor& pred, const ad::Tensor& truth);

struct SequenceMetrics {
  std::string name;
  MetricValues values;
  MetricValues beta_window_mean;
};

struct MetricsReport {
  MetricValues overall;
  MetricValues beta_window_mean;  // same predictions with beta averaged over each window
  std::vector<SequenceMetrics> sequences;
  std::string crop_mode = "predicted";
  std::string config_fingerprint;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

}  // namespace mmbat::harness
