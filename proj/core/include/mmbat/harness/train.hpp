#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmbat/harness/checkpoint.hpp"
#include "mmbat/harness/run_config.hpp"
#include "mmbat/harness/windows.hpp"
#include "mmbat/net/losses.hpp"

namespace mmbat::harness {

struct StepLog {
  std::uint64_t step = 0;  // 1-based
  net::LossReport losses;
};

/// Header plus one row per step: step,l_pred,l_joint,l_theta,l_beta,l_gamma,l_J,l_M,l_total.
/// Values are printed with round-trip precision.
std::string loss_csv_header();
std::string loss_csv_row(const StepLog& s);

struct TrainOptions {
  std::optional<Checkpoint> resume;
  std::vector<std::string> names;  // per dataset entry, for messages; defaults to "seq<i>"
  std::function<void(const StepLog&)> on_step;
  std::function<void(const Checkpoint&)> on_epoch_end;
};

struct TrainResult {
  Checkpoint checkpoint;  // final state
  std::vector<StepLog> log;
  std::vector<double> validation_loss;  // mean l_total per finished epoch; empty without a split
  std::vector<std::size_t> train_sequences;
  std::vector<std::size_t> validation_sequences;
  std::vector<std::string> warnings;
};

/// Sequence-level split: floor(fraction * n) sequences chosen by a seeded
/// shuffle are held out; the rest train. Both lists are sorted.
void split_sequences(std::size_t n, double fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                     std::vector<std::size_t>& validation);

/// Adam on l_total over shuffled batches of teacher-forced windows.
/// Per-step randomness (dropout, crop sampling, center jitter) is keyed by
/// (seed, step, slot), and the checkpoint stores the shuffle generator as of
/// the current epoch start, so resuming replays the same trajectory.
TrainResult train(const RunConfig& config, const std::vector<radar::RawSequence>& data,
                  const TrainOptions& options = {});

/// Rebuilds the network described by a checkpoint and loads its weights.
net::MmbatNet model_from_checkpoint(const Checkpoint& ckpt, RunConfig* config_out = nullptr);

}  // namespace mmbat::harness
