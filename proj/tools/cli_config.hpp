#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmbat/harness/run_config.hpp"
#include "mmbat/radar/simulator.hpp"

namespace mmbat::cli {

struct SimulateSettings {
  std::vector<std::string> kinds{"walk_line"};  // cycled over sequences
  std::size_t sequences = 1;
  double seconds = 10.0;
  std::optional<std::size_t> frames;  // overrides seconds when set
  double frame_rate = 10.0;
  double speed = 1.0;
  radar::NoiseConfig noise;
  radar::Vec3 radar_origin{0.0, 0.0, 0.0};
};

struct EvalSettings {
  std::string checkpoint;
  bool oracle_crop = false;
  std::string dump_frames;  // empty: no dump
};

/// The whole resolved configuration of one CLI run. Serialized next to every
/// output so the run can be repeated with `--config <that file>`.
struct CliConfig {
  harness::RunConfig run;
  SimulateSettings simulate;
  EvalSettings eval;
  std::vector<std::string> data;
  std::string resume;
};

nlohmann::json to_json(const CliConfig& c);
/// Applies the keys present in `j` on top of `c`; unknown keys raise ConfigError.
void merge_json(CliConfig& c, const nlohmann::json& j);
void validate(const CliConfig& c);

/// Expands directories to their *.mmrd files (sorted); files pass through.
std::vector<std::filesystem::path> expand_datasets(const std::vector<std::string>& entries);

}  // namespace mmbat::cli
