#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mmbat/errors.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace mmbat::cli;
  CLI::App app{"mmWave radar body estimation: simulate, train, evaluate, inspect"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config_path, "JSON config layered over the defaults")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory (default mmbat_out)");

  SimulateFlags sf;
  auto* sim = app.add_subcommand("simulate", "render synthetic radar sequences with ground truth");
  sim->add_option("--kind", sf.kinds, "motion kind(s): walk_line, walk_circle, arm_swing, squat")
      ->delimiter(',');
  auto* seconds = sim->add_option("--seconds", sf.seconds, "sequence length in seconds")->check(CLI::PositiveNumber);
  sim->add_option("--frames", sf.frames, "sequence length in frames")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
      ->excludes(seconds);
  sim->add_option("--frame-rate", sf.frame_rate, "frames per second")->check(CLI::PositiveNumber);
  sim->add_option("--sequences", sf.sequences, "number of sequences")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  sim->add_option("--clutter", sf.clutter, "mean clutter points per frame")->check(CLI::NonNegativeNumber);
  sim->add_option("--ghosts", sf.ghosts, "ghost probability per body point")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--jitter", sf.jitter, "position jitter sigma in metres")->check(CLI::NonNegativeNumber);
  sim->add_option("--body-points", sf.body_points, "mean body points per frame")->check(CLI::NonNegativeNumber);

  TrainFlags tf;
  auto* trn = app.add_subcommand("train", "train the network on .mmrd files");
  trn->add_option("--data", tf.data, "dataset files or directories");
  trn->add_option("--epochs", tf.epochs, "epochs (0 writes the initial checkpoint)");
  trn->add_option("--batch-size", tf.batch_size, "windows per step");
  trn->add_option("--lr", tf.learning_rate, "Adam learning rate");
  trn->add_option("--max-steps", tf.max_steps, "stop after this many steps (0 = no cap)");
  trn->add_option("--resume", tf.resume, "continue from a checkpoint")->check(CLI::ExistingFile);

  EvalFlags ef;
  auto* evl = app.add_subcommand("eval", "evaluate a checkpoint");
  evl->add_option("--checkpoint", ef.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  evl->add_option("--data", ef.data, "dataset files or directories");
  evl->add_flag("--oracle-crop", ef.oracle_crop, "crop around ground-truth translation");
  evl->add_option("--dump-frames", ef.dump_frames, "write per-frame predictions as JSON lines");
  evl->add_flag("--force", ef.force, "evaluate despite a config fingerprint mismatch");

  InspectFlags inf;
  auto* ins = app.add_subcommand("inspect", "summarize dataset files");
  ins->add_option("data", inf.data, "dataset files or directories");
  ins->add_option("--bins", inf.bins, "Doppler histogram bins");
  ins->add_option("--doppler-range", inf.doppler_range, "histogram covers [-range, range) m/s");
  ins->add_option("--csv", inf.csv, "write per-frame counts as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*sim) return run_simulate(g, sf);
    if (*trn) return run_train(g, tf);
    if (*evl) return run_eval(g, ef);
    if (*ins) return run_inspect(g, inf);
  } catch (const mmbat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const mmbat::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsageError;
}
