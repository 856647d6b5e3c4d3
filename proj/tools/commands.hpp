#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli_config.hpp"

namespace mmbat::cli {

/// Values given on the command line; unset ones leave the config untouched.
struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;  // empty: mmbat_out for commands that write files, none for inspect
};

struct SimulateFlags {
  std::vector<std::string> kinds;
  std::optional<double> seconds;
  std::optional<std::size_t> frames;
  std::optional<double> frame_rate;
  std::optional<std::size_t> sequences;
  std::optional<double> clutter;
  std::optional<double> ghosts;
  std::optional<double> jitter;
  std::optional<double> body_points;
};

struct TrainFlags {
  std::vector<std::string> data;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::size_t> max_steps;
  std::string resume;
};

struct EvalFlags {
  std::vector<std::string> data;
  std::string checkpoint;
  bool oracle_crop = false;
  std::string dump_frames;
  bool force = false;
};

struct InspectFlags {
  std::vector<std::string> data;
  std::size_t bins = 16;
  double doppler_range = 2.0;
  std::string csv;
};

int run_simulate(const GlobalFlags& g, const SimulateFlags& f);
int run_train(const GlobalFlags& g, const TrainFlags& f);
int run_eval(const GlobalFlags& g, const EvalFlags& f);
int run_inspect(const GlobalFlags& g, const InspectFlags& f);

/// Report printed by `inspect` for one file; also used by tests.
nlohmann::json inspect_dataset(const std::filesystem::path& path, const net::NetConfig& net, std::size_t bins,
                               double doppler_range);

}  // namespace mmbat::cli
