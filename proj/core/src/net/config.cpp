#include "mmbat/net/config.hpp"

#include <string>

#include "mmbat/errors.hpp"
#include "mmbat/util/json_config.hpp"

namespace mmbat::net {
namespace {

void require_widths(const std::vector<std::size_t>& w, const char* what, bool allow_empty) {
  if (!allow_empty && w.empty()) throw ConfigError(std::string(what) + " needs at least one layer");
  for (std::size_t x : w) {
    if (x == 0) throw ConfigError(std::string(what) + " widths must be positive");
  }
}

}  // namespace

void NetConfig::validate() const {
  if (window == 0) throw ConfigError("window must be >= 1");
  if (points == 0) throw ConfigError("points must be >= 1");
  if (channels < 4) throw ConfigError("channels must be >= 4 (x, y, z, doppler)");
  if (n_joints == 0) throw ConfigError("n_joints must be >= 1");
  if (sa_stages.empty()) throw ConfigError("backbone needs at least one set-abstraction stage");
  for (const auto& s : sa_stages) {
    if (s.sample_divisor == 0) throw ConfigError("sample_divisor must be >= 1");
    if (!(s.radius > 0.0)) throw ConfigError("set-abstraction radius must be > 0");
    if (s.group_size == 0) throw ConfigError("group_size must be >= 1");
    require_widths(s.mlp, "set-abstraction mlp", false);
  }
  require_widths(global_mlp, "global_mlp", false);
  require_widths(translation_hidden, "translation_hidden", true);
  require_widths(skeleton_hidden, "skeleton_hidden", true);
  require_widths(pose_hidden, "pose_hidden", true);
  require_widths(shape_hidden, "shape_hidden", true);
  if (gru_hidden == 0) throw ConfigError("gru_hidden must be >= 1");
  if (fusion_width == 0) throw ConfigError("fusion_width must be >= 1");
  if (heads == 0 || fusion_width % heads != 0) {
    throw ConfigError("heads (" + std::to_string(heads) + ") must divide fusion_width (" +
                      std::to_string(fusion_width) + ")");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  for (double b : box) {
    if (!(b > 0.0)) throw ConfigError("box extents must be > 0");
  }
  for (double s : {loss_scales.pred, loss_scales.joint, loss_scales.theta, loss_scales.beta, loss_scales.gamma,
                   loss_scales.joints, loss_scales.vertices}) {
    if (!(s >= 0.0)) throw ConfigError("loss scale factors must be >= 0");
  }
}

void to_json(nlohmann::json& j, const SetAbstractionConfig& c) {
  j = {{"sample_divisor", c.sample_divisor}, {"radius", c.radius}, {"group_size", c.group_size}, {"mlp", c.mlp}};
}

void from_json(const nlohmann::json& j, SetAbstractionConfig& c) {
  util::require_known_keys(j, {"sample_divisor", "radius", "group_size", "mlp"}, "net.sa_stages[]");
  util::read_optional(j, "sample_divisor", c.sample_divisor);
  util::read_optional(j, "radius", c.radius);
  util::read_optional(j, "group_size", c.group_size);
  util::read_optional(j, "mlp", c.mlp);
}

void to_json(nlohmann::json& j, const LossScales& c) {
  j = {{"pred", c.pred},   {"joint", c.joint},   {"theta", c.theta},       {"beta", c.beta},
       {"gamma", c.gamma}, {"joints", c.joints}, {"vertices", c.vertices}};
}

void from_json(const nlohmann::json& j, LossScales& c) {
  util::require_known_keys(j, {"pred", "joint", "theta", "beta", "gamma", "joints", "vertices"}, "net.loss_scales");
  util::read_optional(j, "pred", c.pred);
  util::read_optional(j, "joint", c.joint);
  util::read_optional(j, "theta", c.theta);
  util::read_optional(j, "beta", c.beta);
  util::read_optional(j, "gamma", c.gamma);
  util::read_optional(j, "joints", c.joints);
  util::read_optional(j, "vertices", c.vertices);
}

void to_json(nlohmann::json& j, const NetConfig& c) {
  j = {
      {"window", c.window},
      {"points", c.points},
      {"channels", c.channels},
      {"n_joints", c.n_joints},
      {"n_shape", c.n_shape},
      {"sa_stages", c.sa_stages},
      {"global_mlp", c.global_mlp},
      {"gru_hidden", c.gru_hidden},
      {"translation_hidden", c.translation_hidden},
      {"skeleton_hidden", c.skeleton_hidden},
      {"fusion_width", c.fusion_width},
      {"heads", c.heads},
      {"pose_hidden", c.pose_hidden},
      {"shape_hidden", c.shape_hidden},
      {"dropout", c.dropout},
      {"box", c.box},
      {"loss_scales", c.loss_scales},
      {"init_seed", c.init_seed},
  };
}

void from_json(const nlohmann::json& j, NetConfig& c) {
  util::require_known_keys(j,
                           {"window", "points", "channels", "n_joints", "n_shape", "sa_stages", "global_mlp",
                            "gru_hidden", "translation_hidden", "skeleton_hidden", "fusion_width", "heads",
                            "pose_hidden", "shape_hidden", "dropout", "box", "loss_scales", "init_seed"},
                           "net");
  util::read_optional(j, "window", c.window);
  util::read_optional(j, "points", c.points);
  util::read_optional(j, "channels", c.channels);
  util::read_optional(j, "n_joints", c.n_joints);
  util::read_optional(j, "n_shape", c.n_shape);
  util::read_optional(j, "sa_stages", c.sa_stages);
  util::read_optional(j, "global_mlp", c.global_mlp);
  util::read_optional(j, "gru_hidden", c.gru_hidden);
  util::read_optional(j, "translation_hidden", c.translation_hidden);
  util::read_optional(j, "skeleton_hidden", c.skeleton_hidden);
  util::read_optional(j, "fusion_width", c.fusion_width);
  util::read_optional(j, "heads", c.heads);
  util::read_optional(j, "pose_hidden", c.pose_hidden);
  util::read_optional(j, "shape_hidden", c.shape_hidden);
  util::read_optional(j, "dropout", c.dropout);
  util::read_optional(j, "box", c.box);
  util::read_optional(j, "loss_scales", c.loss_scales);
  util::read_optional(j, "init_seed", c.init_seed);
  c.validate();
}

}  // namespace mmbat::net
