#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "mmbat/autodiff/adam.hpp"
#include "mmbat/body/body_template.hpp"
#include "mmbat/net/config.hpp"

namespace mmbat::harness {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  ad::DecayMode decay_mode = ad::DecayMode::weight_decay;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;  // held out by whole sequences
  std::size_t max_steps = 0;         // 0 = no cap
  double crop_jitter = 0.05;         // m; one uniform offset per window and axis, plus a quarter of it per frame
  double static_crop_fraction = 0.25;  // share of windows cropped around their first frame only

  ad::AdamConfig adam() const;
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Everything a run needs besides data. Sections: "seed", "body", "net", "train".
struct RunConfig {
  std::uint64_t seed = 0;
  body::TemplateConfig body;
  net::NetConfig net;
  TrainConfig train;

  void validate() const;
  /// Digest of the model-defining sections (body and net).
  std::string fingerprint() const;

  bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
/// Rejects unknown keys in every section; missing keys keep their defaults.
void from_json(const nlohmann::json& j, RunConfig& c);

}  // namespace mmbat::harness
