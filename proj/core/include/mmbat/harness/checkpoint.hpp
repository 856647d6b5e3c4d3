#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmbat/autodiff/adam.hpp"
#include "mmbat/net/mmbat_net.hpp"

namespace mmbat::harness {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParameterRecord {
  std::string name;
  ad::Shape shape;
  std::vector<double> values;
  std::vector<double> first_moment;   // empty until the optimizer has touched it
  std::vector<double> second_moment;
  std::uint64_t file_offset = 0;      // where the record starts when read from disk
};

/// Weights, optimizer and sampler state plus the resolved run config.
struct Checkpoint {
  nlohmann::json config;
  std::uint64_t epoch = 0;           // epoch in progress (== completed epochs at a boundary)
  std::uint64_t batch_in_epoch = 0;  // batches of `epoch` already consumed
  std::uint64_t step = 0;            // optimizer steps taken
  std::string epoch_rng_state;       // shuffle generator as of the start of `epoch`
  ad::AdamConfig adam_config;
  std::uint64_t adam_steps = 0;
  std::vector<ParameterRecord> parameters;

  bool operator==(const Checkpoint& o) const;
};

/// Copies the model weights and, when given, the optimizer moments.
std::vector<ParameterRecord> capture_parameters(const std::vector<ad::NamedParameter>& params,
                                                const ad::AdamState* adam = nullptr);

/// Writes the stored weights into `model` and returns the optimizer state.
/// Every name and shape must match; otherwise FormatError lists each
/// offending parameter.
ad::AdamState restore_parameters(const Checkpoint& ckpt, net::MmbatNet& model);

/// Binary layout (little-endian):
///   "MMBT" | version u32 | metadata_len u64 | metadata JSON | param_count u32
///   per parameter: name_len u32 | name | rank u32 | extents u64[rank] |
///                  values f64[n] | has_moments u8 [| m f64[n] | v f64[n]]
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::vector<std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mmbat::harness
