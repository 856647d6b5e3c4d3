#include "mmbat/harness/checkpoint.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "mmbat/errors.hpp"
#include "mmbat/util/binary_io.hpp"

namespace mmbat::harness {
namespace {

constexpr std::string_view kMagic = "MMBT";

nlohmann::json adam_to_json(const ad::AdamConfig& a, std::uint64_t steps) {
  return {{"learning_rate", a.learning_rate},
          {"beta1", a.beta1},
          {"beta2", a.beta2},
          {"epsilon", a.epsilon},
          {"decay", a.decay},
          {"decay_mode", a.decay_mode == ad::DecayMode::weight_decay ? "weight_decay" : "lr_schedule"},
          {"steps", steps}};
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& o) const {
  return encode_checkpoint(*this) == encode_checkpoint(o);
}

std::vector<ParameterRecord> capture_parameters(const std::vector<ad::NamedParameter>& params,
                                                const ad::AdamState* adam) {
  std::vector<ParameterRecord> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParameterRecord r;
    r.name = params[i].name;
    r.shape = params[i].tensor.shape();
    r.values.assign(params[i].tensor.values().begin(), params[i].tensor.values().end());
    if (adam && i < adam->first_moment.size() && !adam->first_moment[i].empty()) {
      r.first_moment = adam->first_moment[i];
      r.second_moment = adam->second_moment[i];
    }
    out.push_back(std::move(r));
  }
  return out;
}

ad::AdamState restore_parameters(const Checkpoint& ckpt, net::MmbatNet& model) {
  auto& params = model.parameters();
  std::map<std::string, const ParameterRecord*> by_name;
  for (const auto& r : ckpt.parameters) by_name[r.name] = &r;

  std::vector<std::string> problems;
  std::uint64_t first_offset = 0;
  auto note = [&](const std::string& msg, std::uint64_t offset) {
    if (problems.empty()) first_offset = offset;
    problems.push_back(msg);
  };
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      note(p.name + " (missing from checkpoint)", 0);
    } else if (it->second->shape != p.tensor.shape()) {
      note(p.name + " (checkpoint " + ad::shape_str(it->second->shape) + ", model " + ad::shape_str(p.tensor.shape()) +
               ")",
           it->second->file_offset);
    }
  }
  for (const auto& r : ckpt.parameters) {
    const bool known = std::any_of(params.begin(), params.end(), [&](const auto& p) { return p.name == r.name; });
    if (!known) note(r.name + " (not in model)", r.file_offset);
  }
  if (!problems.empty()) {
    std::string msg = "checkpoint does not match the model: ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? ", " : "") + problems[i];
    throw FormatError(msg, first_offset);
  }

  ad::AdamState state;
  state.config = ckpt.adam_config;
  state.step_count = ckpt.adam_steps;
  bool any_moments = false;
  for (const auto& r : ckpt.parameters) any_moments = any_moments || !r.first_moment.empty();
  if (any_moments) {
    state.first_moment.resize(params.size());
    state.second_moment.resize(params.size());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParameterRecord& r = *by_name.at(params[i].name);
    std::copy(r.values.begin(), r.values.end(), params[i].tensor.mutable_values().begin());
    params[i].tensor.zero_grad();
    if (any_moments) {
      state.first_moment[i] = r.first_moment;
      state.second_moment[i] = r.second_moment;
    }
  }
  return state;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  const nlohmann::json meta = {{"config", c.config},
                               {"epoch", c.epoch},
                               {"batch_in_epoch", c.batch_in_epoch},
                               {"step", c.step},
                               {"epoch_rng_state", c.epoch_rng_state},
                               {"adam", adam_to_json(c.adam_config, c.adam_steps)}};
  const std::string text = meta.dump();
  util::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u64(text.size());
  w.bytes(text);
  w.u32(static_cast<std::uint32_t>(c.parameters.size()));
  for (const auto& p : c.parameters) {
    w.u32(static_cast<std::uint32_t>(p.name.size()));
    w.bytes(p.name);
    w.u32(static_cast<std::uint32_t>(p.shape.size()));
    for (std::size_t e : p.shape) w.u64(e);
    w.f64s(p.values);
    const bool moments = !p.first_moment.empty();
    w.u8(moments ? 1 : 0);
    if (moments) {
      w.f64s(p.first_moment);
      w.f64s(p.second_moment);
    }
  }
  return w.buffer();
}

Checkpoint decode_checkpoint(std::vector<std::uint8_t> bytes) {
  util::ByteReader r(std::move(bytes));
  if (r.bytes(4) != kMagic) throw FormatError("not an MMBT checkpoint (bad magic)", 0);
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  const std::uint64_t meta_at = r.offset();
  const std::uint64_t meta_len = r.u64();
  if (meta_len > r.remaining()) throw FormatError("metadata truncated", meta_at);
  Checkpoint c;
  try {
    const nlohmann::json meta = nlohmann::json::parse(r.bytes(meta_len));
    c.config = meta.at("config");
    c.epoch = meta.at("epoch").get<std::uint64_t>();
    c.batch_in_epoch = meta.at("batch_in_epoch").get<std::uint64_t>();
    c.step = meta.at("step").get<std::uint64_t>();
    c.epoch_rng_state = meta.at("epoch_rng_state").get<std::string>();
    const auto& a = meta.at("adam");
    c.adam_config.learning_rate = a.at("learning_rate").get<double>();
    c.adam_config.beta1 = a.at("beta1").get<double>();
    c.adam_config.beta2 = a.at("beta2").get<double>();
    c.adam_config.epsilon = a.at("epsilon").get<double>();
    c.adam_config.decay = a.at("decay").get<double>();
    c.adam_config.decay_mode =
        a.at("decay_mode").get<std::string>() == "lr_schedule" ? ad::DecayMode::lr_schedule : ad::DecayMode::weight_decay;
    c.adam_steps = a.at("steps").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint metadata: ") + e.what(), meta_at);
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    ParameterRecord p;
    p.file_offset = r.offset();
    const std::uint32_t name_len = r.u32();
    p.name = r.bytes(name_len);
    const std::uint64_t rank_at = r.offset();
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("parameter " + p.name + " has implausible rank", rank_at);
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      p.shape.push_back(r.u64());
      n *= p.shape.back();
    }
    if (n > r.remaining() / 8) throw FormatError("parameter " + p.name + " payload truncated", r.offset());
    p.values.resize(n);
    r.f64s(p.values);
    const std::uint64_t flag_at = r.offset();
    const std::uint8_t moments = r.u8();
    if (moments > 1) throw FormatError("bad moment flag for " + p.name, flag_at);
    if (moments) {
      p.first_moment.resize(n);
      p.second_moment.resize(n);
      r.f64s(p.first_moment);
      r.f64s(p.second_moment);
    }
    c.parameters.push_back(std::move(p));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint", r.offset());
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  util::write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(util::read_file_bytes(path)); }

}  // namespace mmbat::harness
