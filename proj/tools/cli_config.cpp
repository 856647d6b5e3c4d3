#include "cli_config.hpp"

#include <algorithm>

#include "mmbat/errors.hpp"
#include "mmbat/util/json_config.hpp"

namespace mmbat::cli {

nlohmann::json to_json(const CliConfig& c) {
  nlohmann::json sim = {{"kinds", c.simulate.kinds},
                        {"sequences", c.simulate.sequences},
                        {"seconds", c.simulate.seconds},
                        {"frame_rate", c.simulate.frame_rate},
                        {"speed", c.simulate.speed},
                        {"noise", c.simulate.noise},
                        {"radar_origin", c.simulate.radar_origin}};
  sim["frames"] = c.simulate.frames ? nlohmann::json(*c.simulate.frames) : nlohmann::json(nullptr);
  nlohmann::json j = c.run;
  j["simulate"] = sim;
  j["eval"] = {{"checkpoint", c.eval.checkpoint}, {"oracle_crop", c.eval.oracle_crop}, {"dump_frames", c.eval.dump_frames}};
  j["data"] = c.data;
  j["resume"] = c.resume;
  return j;
}

void merge_json(CliConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  util::require_known_keys(j, {"seed", "body", "net", "train", "simulate", "eval", "data", "resume"}, "config");
  try {
    nlohmann::json run = c.run;
    for (const char* key : {"seed", "body", "net", "train"}) {
      if (!j.contains(key)) continue;
      if (j[key].is_object()) run[key].update(j[key]);
      else run[key] = j[key];
    }
    c.run = run.get<harness::RunConfig>();

    if (auto it = j.find("simulate"); it != j.end()) {
      const auto& s = *it;
      util::require_known_keys(s, {"kinds", "sequences", "seconds", "frames", "frame_rate", "speed", "noise", "radar_origin"},
                               "simulate");
      util::read_optional(s, "kinds", c.simulate.kinds);
      util::read_optional(s, "sequences", c.simulate.sequences);
      util::read_optional(s, "seconds", c.simulate.seconds);
      if (auto f = s.find("frames"); f != s.end()) {
        if (f->is_null()) c.simulate.frames.reset();
        else c.simulate.frames = f->get<std::size_t>();
      }
      util::read_optional(s, "frame_rate", c.simulate.frame_rate);
      util::read_optional(s, "speed", c.simulate.speed);
      if (auto n = s.find("noise"); n != s.end()) {
        nlohmann::json merged = c.simulate.noise;
        merged.update(*n);
        c.simulate.noise = merged.get<radar::NoiseConfig>();
      }
      util::read_optional(s, "radar_origin", c.simulate.radar_origin);
    }
    if (auto it = j.find("eval"); it != j.end()) {
      util::require_known_keys(*it, {"checkpoint", "oracle_crop", "dump_frames"}, "eval");
      util::read_optional(*it, "checkpoint", c.eval.checkpoint);
      util::read_optional(*it, "oracle_crop", c.eval.oracle_crop);
      util::read_optional(*it, "dump_frames", c.eval.dump_frames);
    }
    util::read_optional(j, "data", c.data);
    util::read_optional(j, "resume", c.resume);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
}

void validate(const CliConfig& c) {
  c.run.validate();
  c.simulate.noise.validate();
  if (c.simulate.kinds.empty()) throw ConfigError("simulate.kinds must not be empty");
  for (const auto& k : c.simulate.kinds) radar::parse_motion_kind(k);
  if (c.simulate.sequences == 0) throw ConfigError("simulate.sequences must be >= 1");
  if (!(c.simulate.frame_rate > 0.0)) throw ConfigError("simulate.frame_rate must be > 0");
  if (c.simulate.frames && *c.simulate.frames == 0) throw ConfigError("simulate.frames must be >= 1");
  if (!c.simulate.frames && !(c.simulate.seconds * c.simulate.frame_rate >= 1.0)) {
    throw ConfigError("simulate.seconds * frame_rate must be >= 1");
  }
  if (!(c.simulate.speed >= 0.0)) throw ConfigError("simulate.speed must be >= 0");
}

std::vector<std::filesystem::path> expand_datasets(const std::vector<std::string>& entries) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : entries) {
    const std::filesystem::path p(e);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& de : std::filesystem::directory_iterator(p)) {
        if (de.is_regular_file() && de.path().extension() == ".mmrd") found.push_back(de.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace mmbat::cli
