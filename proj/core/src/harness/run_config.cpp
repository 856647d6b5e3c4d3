#include "mmbat/harness/run_config.hpp"

#include "mmbat/errors.hpp"
#include "mmbat/util/json_config.hpp"

namespace mmbat::harness {

ad::AdamConfig TrainConfig::adam() const {
  ad::AdamConfig a;
  a.learning_rate = learning_rate;
  a.beta1 = beta1;
  a.beta2 = beta2;
  a.epsilon = epsilon;
  a.decay = weight_decay;
  a.decay_mode = decay_mode;
  return a;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train.beta1 and train.beta2 must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("train.epsilon must be > 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("train.validation_fraction must be in (0, 1)");
  }
  if (!(crop_jitter >= 0.0)) throw ConfigError("train.crop_jitter must be >= 0");
  if (!(static_crop_fraction >= 0.0 && static_crop_fraction <= 1.0)) {
    throw ConfigError("train.static_crop_fraction must be in [0, 1]");
  }
}

void RunConfig::validate() const {
  net.validate();
  train.validate();
  if (body.n_joints != net.n_joints || body.n_shape != net.n_shape) {
    throw ConfigError("body and net sections disagree on n_joints / n_shape");
  }
}

std::string RunConfig::fingerprint() const {
  return util::json_fingerprint(nlohmann::json{{"body", body}, {"net", net}});
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"decay_mode", c.decay_mode == ad::DecayMode::weight_decay ? "weight_decay" : "lr_schedule"},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"epsilon", c.epsilon},
      {"validation_fraction", c.validation_fraction},
      {"max_steps", c.max_steps},
      {"crop_jitter", c.crop_jitter},
      {"static_crop_fraction", c.static_crop_fraction},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  util::require_known_keys(j,
                           {"epochs", "batch_size", "learning_rate", "weight_decay", "decay_mode", "beta1", "beta2",
                            "epsilon", "validation_fraction", "max_steps", "crop_jitter",
                            "static_crop_fraction"},
                           "train");
  util::read_optional(j, "epochs", c.epochs);
  util::read_optional(j, "batch_size", c.batch_size);
  util::read_optional(j, "learning_rate", c.learning_rate);
  util::read_optional(j, "weight_decay", c.weight_decay);
  if (auto it = j.find("decay_mode"); it != j.end()) {
    const std::string m = it->get<std::string>();
    if (m == "weight_decay") c.decay_mode = ad::DecayMode::weight_decay;
    else if (m == "lr_schedule") c.decay_mode = ad::DecayMode::lr_schedule;
    else throw ConfigError("train.decay_mode must be 'weight_decay' or 'lr_schedule'");
  }
  util::read_optional(j, "beta1", c.beta1);
  util::read_optional(j, "beta2", c.beta2);
  util::read_optional(j, "epsilon", c.epsilon);
  util::read_optional(j, "validation_fraction", c.validation_fraction);
  util::read_optional(j, "max_steps", c.max_steps);
  util::read_optional(j, "crop_jitter", c.crop_jitter);
  util::read_optional(j, "static_crop_fraction", c.static_crop_fraction);
  c.validate();
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"seed", c.seed}, {"body", c.body}, {"net", c.net}, {"train", c.train}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  util::require_known_keys(j, {"seed", "body", "net", "train"}, "run");
  util::read_optional(j, "seed", c.seed);
  util::read_optional(j, "body", c.body);
  util::read_optional(j, "net", c.net);
  util::read_optional(j, "train", c.train);
  c.validate();
}

}  // namespace mmbat::harness
