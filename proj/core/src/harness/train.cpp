#include "mmbat/harness/train.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"
#include "mmbat/net/crop.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::harness {
namespace {

enum SeedKey : std::uint64_t { kDropout = 1, kCrop = 2, kJitter = 3, kSplit = 4, kShuffle = 5, kValidation = 6 };

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 rng_from_string(const std::string& s) {
  std::mt19937_64 rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw FormatError("checkpoint holds an unreadable generator state", 0);
  return rng;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Batch {
  std::vector<net::ProcessedSequence> inputs;
  net::LossTargets targets;
};

struct CropPolicy {
  double jitter = 0.0;
  double static_fraction = 0.0;
};

// Crops and ground truth for a set of windows. A static crop centers every
// frame on the window's first ground-truth translation, the way inference
// crops window 0 from the initial box.
Batch make_batch(const std::vector<radar::RawSequence>& data, const std::vector<net::BodyEstimate>& truth,
                 const std::vector<WindowRef>& windows, const net::NetConfig& cfg, const CropPolicy& policy,
                 std::uint64_t seed, std::uint64_t step) {
  const std::size_t t = cfg.window;
  Batch b;
  std::vector<net::BodyEstimate> bodies;
  std::vector<ad::Tensor> next;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const WindowRef& w = windows[i];
    const radar::RawSequence& seq = data[w.sequence];
    std::vector<double> centers = truth_centers(seq, w.start, t);
    std::mt19937_64 rng(util::derive_seed(seed, {kJitter, step, i}));
    if (policy.static_fraction > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < policy.static_fraction) {
      for (std::size_t f = 1; f < t; ++f) std::copy_n(centers.begin(), 3, centers.begin() + f * 3);
    }
    if (policy.jitter > 0.0) {
      std::uniform_real_distribution<double> shared(-policy.jitter, policy.jitter);
      std::uniform_real_distribution<double> per_frame(-0.25 * policy.jitter, 0.25 * policy.jitter);
      const double offset[3] = {shared(rng), shared(rng), shared(rng)};
      for (std::size_t k = 0; k < centers.size(); ++k) centers[k] += offset[k % 3] + per_frame(rng);
    }
    b.inputs.push_back(net::crop_window(std::span(seq.frames).subspan(w.start, t), centers, t, cfg.points,
                                        util::derive_seed(seed, {kCrop, step, i}), cfg.box, w.start,
                                        net::CropSource::ground_truth));
    bodies.push_back(take_frames(truth[w.sequence], w.start, t));
    next.push_back(ad::reshape(take_rows(truth[w.sequence].params.gamma, w.start + t, t), {1, t, 3}));
  }
  b.targets.body = stack_frames(bodies);
  b.targets.next_translation = stack_rows(next);
  return b;
}

}  // namespace

std::string loss_csv_header() { return "step,l_pred,l_joint,l_theta,l_beta,l_gamma,l_J,l_M,l_total"; }

std::string loss_csv_row(const StepLog& s) {
  const net::LossReport& l = s.losses;
  return std::to_string(s.step) + "," + fmt(l.l_pred) + "," + fmt(l.l_joint) + "," + fmt(l.l_theta) + "," +
         fmt(l.l_beta) + "," + fmt(l.l_gamma) + "," + fmt(l.l_J) + "," + fmt(l.l_M) + "," + fmt(l.l_total);
}

void split_sequences(std::size_t n, double fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                     std::vector<std::size_t>& validation) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(util::derive_seed(seed, {kSplit}));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());
}

net::MmbatNet model_from_checkpoint(const Checkpoint& ckpt, RunConfig* config_out) {
  RunConfig cfg;
  try {
    cfg = ckpt.config.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config is unreadable: ") + e.what(), 0);
  }
  net::MmbatNet model(cfg.net, body::make_template(cfg.body));
  restore_parameters(ckpt, model);
  if (config_out) *config_out = cfg;
  return model;
}

TrainResult train(const RunConfig& config, const std::vector<radar::RawSequence>& data, const TrainOptions& options) {
  config.validate();
  const net::NetConfig& ncfg = config.net;
  const TrainConfig& tcfg = config.train;
  std::vector<std::string> names = options.names;
  for (std::size_t i = names.size(); i < data.size(); ++i) names.push_back("seq" + std::to_string(i));

  const body::BodyTemplate tmpl = body::make_template(config.body);
  net::MmbatNet model(ncfg, tmpl);

  std::vector<net::BodyEstimate> truth;
  truth.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].channels != ncfg.channels) {
      throw ContractError("sequence '" + names[i] + "' has " + std::to_string(data[i].channels) +
                          " channels, the network expects " + std::to_string(ncfg.channels));
    }
    truth.push_back(ground_truth_estimate(tmpl, data[i], names[i]));
  }

  TrainResult result;
  split_sequences(data.size(), tcfg.validation_fraction, config.seed, result.train_sequences,
                  result.validation_sequences);
  const std::vector<WindowRef> windows =
      training_windows(data, result.train_sequences, ncfg.window, names, result.warnings);
  std::vector<std::string> ignored;
  const std::vector<WindowRef> val_windows =
      training_windows(data, result.validation_sequences, ncfg.window, names, ignored);
  if (windows.empty()) throw ContractError("no usable training windows (every sequence is shorter than 2T)");

  ad::AdamState adam;
  adam.config = tcfg.adam();
  std::uint64_t epoch = 0, batch_in_epoch = 0, step = 0;
  std::mt19937_64 shuffle_rng(util::derive_seed(config.seed, {kShuffle}));
  if (options.resume) {
    const Checkpoint& ck = *options.resume;
    RunConfig saved;
    try {
      saved = ck.config.get<RunConfig>();
    } catch (const std::exception& e) {
      throw FormatError(std::string("checkpoint config is unreadable: ") + e.what(), 0);
    }
    if (saved.fingerprint() != config.fingerprint() || saved.seed != config.seed) {
      throw ConfigError("resume checkpoint was produced with a different model config or seed");
    }
    adam = restore_parameters(ck, model);
    adam.config = tcfg.adam();
    epoch = ck.epoch;
    batch_in_epoch = ck.batch_in_epoch;
    step = ck.step;
    shuffle_rng = rng_from_string(ck.epoch_rng_state);
  }

  std::string epoch_rng = rng_to_string(shuffle_rng);
  auto snapshot = [&] {
    Checkpoint c;
    c.config = config;
    c.epoch = epoch;
    c.batch_in_epoch = batch_in_epoch;
    c.step = step;
    c.epoch_rng_state = epoch_rng;
    c.adam_config = adam.config;
    c.adam_steps = adam.step_count;
    c.parameters = capture_parameters(model.parameters(), &adam);
    return c;
  };

  const std::size_t bs = tcfg.batch_size;
  const std::size_t batches_per_epoch = (windows.size() + bs - 1) / bs;
  bool capped = false;
  while (epoch < tcfg.epochs && !capped) {
    epoch_rng = rng_to_string(shuffle_rng);
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (; batch_in_epoch < batches_per_epoch; ++batch_in_epoch) {
      if (tcfg.max_steps > 0 && step >= tcfg.max_steps) {
        capped = true;
        break;
      }
      std::vector<WindowRef> chosen;
      for (std::size_t k = batch_in_epoch * bs; k < std::min(windows.size(), (batch_in_epoch + 1) * bs); ++k) {
        chosen.push_back(windows[order[k]]);
      }
      ++step;
      const Batch batch = make_batch(data, truth, chosen, ncfg, {tcfg.crop_jitter, tcfg.static_crop_fraction},
                                     config.seed, step);
      const net::ForwardMode mode{true, ncfg.dropout, util::derive_seed(config.seed, {kDropout, step})};
      const net::NetOutput out = model.forward(batch.inputs, mode);
      const net::Losses losses = net::compute_losses({out.body, out.translation, out.coarse_joints}, batch.targets,
                                                     ncfg.loss_scales);
      StepLog entry{step, losses.report()};
      ad::backward(losses.l_total);
      ad::adam_step(model.parameters(), adam);
      result.log.push_back(entry);
      if (options.on_step) options.on_step(entry);
    }
    if (capped) break;

    ++epoch;
    batch_in_epoch = 0;
    if (!val_windows.empty()) {
      double total = 0.0;
      for (std::size_t k = 0; k < val_windows.size(); k += bs) {
        std::vector<WindowRef> chosen(val_windows.begin() + static_cast<std::ptrdiff_t>(k),
                                      val_windows.begin() + static_cast<std::ptrdiff_t>(std::min(val_windows.size(), k + bs)));
        const Batch batch = make_batch(data, truth, chosen, ncfg, {}, util::derive_seed(config.seed, {kValidation}), k);
        const net::NetOutput out = model.forward(batch.inputs, net::ForwardMode{});
        const net::Losses losses = net::compute_losses({out.body, out.translation, out.coarse_joints}, batch.targets,
                                                       ncfg.loss_scales);
        total += losses.l_total.item() * static_cast<double>(chosen.size());
      }
      result.validation_loss.push_back(total / static_cast<double>(val_windows.size()));
    }
    epoch_rng = rng_to_string(shuffle_rng);
    if (options.on_epoch_end) options.on_epoch_end(snapshot());
  }
  result.checkpoint = snapshot();
  return result;
}

}  // namespace mmbat::harness
