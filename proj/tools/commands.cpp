#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "mmbat/body/body_template.hpp"
#include "mmbat/errors.hpp"
#include "mmbat/harness/evaluate.hpp"
#include "mmbat/harness/train.hpp"
#include "mmbat/radar/dataset_io.hpp"
#include "mmbat/util/json_config.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::cli {
namespace fs = std::filesystem;

namespace {

CliConfig load_layers(const GlobalFlags& g, CliConfig base) {
  if (!g.config_path.empty()) merge_json(base, util::read_json_file(g.config_path));
  if (g.seed) base.run.seed = *g.seed;
  return base;
}

fs::path out_dir(const GlobalFlags& g) { return g.out.empty() ? fs::path("mmbat_out") : fs::path(g.out); }

void write_resolved(const GlobalFlags& g, const CliConfig& c, const char* command) {
  fs::create_directories(out_dir(g));
  util::write_json_file(out_dir(g) / (std::string(command) + "_config.json"), to_json(c));
}

std::vector<radar::RawSequence> read_all(const std::vector<fs::path>& paths, std::vector<std::string>& names) {
  if (paths.empty()) throw ConfigError("no dataset files given (use --data)");
  std::vector<radar::RawSequence> data;
  for (const auto& p : paths) {
    try {
      data.push_back(radar::read_dataset(p));
    } catch (const FormatError& e) {
      throw std::runtime_error("malformed dataset " + p.string() + ": " + e.what());
    }
    names.push_back(p.string());
  }
  return data;
}

struct CountStats {
  std::size_t min = 0, max = 0, total = 0, frames = 0;
  void add(std::size_t n) {
    min = frames == 0 ? n : std::min(min, n);
    max = std::max(max, n);
    total += n;
    ++frames;
  }
  double mean() const { return frames == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(frames); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Applies checkpoint settings first so that eval and resume inherit the
// trained configuration unless the user overrides it.
CliConfig base_from_checkpoint(const harness::Checkpoint& ckpt) {
  CliConfig c;
  c.run = ckpt.config.get<harness::RunConfig>();
  return c;
}

}  // namespace

int run_simulate(const GlobalFlags& g, const SimulateFlags& f) {
  CliConfig c = load_layers(g, CliConfig{});
  auto& s = c.simulate;
  if (!f.kinds.empty()) s.kinds = f.kinds;
  if (f.seconds) {
    s.seconds = *f.seconds;
    s.frames.reset();
  }
  if (f.frames) s.frames = *f.frames;
  if (f.frame_rate) s.frame_rate = *f.frame_rate;
  if (f.sequences) s.sequences = *f.sequences;
  if (f.clutter) s.noise.clutter_points_per_frame = *f.clutter;
  if (f.ghosts) s.noise.ghost_probability = *f.ghosts;
  if (f.jitter) s.noise.position_jitter_sigma = *f.jitter;
  if (f.body_points) s.noise.body_points_per_frame = *f.body_points;
  validate(c);
  write_resolved(g, c, "simulate");

  const body::BodyTemplate tmpl = body::make_template(c.run.body);
  CountStats overall;
  for (std::size_t i = 0; i < s.sequences; ++i) {
    radar::SimulationSpec spec;
    spec.motion.kind = radar::parse_motion_kind(s.kinds[i % s.kinds.size()]);
    spec.motion.frame_rate = s.frame_rate;
    spec.motion.duration = s.frames ? static_cast<double>(*s.frames) / s.frame_rate : s.seconds;
    spec.motion.seed = util::derive_seed(c.run.seed, {i});
    spec.motion.speed = s.speed;
    spec.noise = s.noise;
    spec.radar_origin = s.radar_origin;
    const radar::RawSequence seq = radar::simulate_sequence(tmpl, spec);

    char stem[32];
    std::snprintf(stem, sizeof stem, "seq_%03zu", i);
    const fs::path file = out_dir(g) / (std::string(stem) + ".mmrd");
    radar::write_dataset(seq, file);

    CountStats st;
    for (const auto& fr : seq.frames) st.add(fr.count());
    for (const auto& fr : seq.frames) overall.add(fr.count());
    nlohmann::json side = {{"file", file.filename().string()},
                           {"simulation", spec},
                           {"frames", seq.size()},
                           {"points", {{"min", st.min}, {"mean", st.mean()}, {"max", st.max}}}};
    util::write_json_file(out_dir(g) / (std::string(stem) + ".json"), side);
    std::cout << file.string() << ": " << seq.size() << " frames, points/frame min " << st.min << " mean "
              << fmt("%.1f", st.mean()) << " max " << st.max << "\n";
  }
  std::cout << "sequences " << s.sequences << ", frames " << overall.frames << ", mean points/frame "
            << fmt("%.1f", overall.mean()) << "\n";
  return 0;
}

int run_train(const GlobalFlags& g, const TrainFlags& f) {
  std::optional<harness::Checkpoint> resume;
  std::string resume_path = f.resume;
  if (resume_path.empty() && !g.config_path.empty()) {
    resume_path = load_layers(g, CliConfig{}).resume;
  }
  CliConfig base;
  if (!resume_path.empty()) {
    resume = harness::load_checkpoint(resume_path);
    base = base_from_checkpoint(*resume);
  }
  CliConfig c = load_layers(g, base);
  c.resume = resume_path;
  if (!f.data.empty()) c.data = f.data;
  if (f.epochs) c.run.train.epochs = *f.epochs;
  if (f.batch_size) c.run.train.batch_size = *f.batch_size;
  if (f.learning_rate) c.run.train.learning_rate = *f.learning_rate;
  if (f.max_steps) c.run.train.max_steps = *f.max_steps;
  validate(c);

  std::vector<std::string> names;
  const auto data = read_all(expand_datasets(c.data), names);
  write_resolved(g, c, "train");

  const fs::path ckpt_path = out_dir(g) / "checkpoint.mmbt";
  std::ofstream csv(out_dir(g) / "loss.csv");
  if (!csv) throw std::runtime_error("cannot write loss.csv in " + out_dir(g).string());
  csv << harness::loss_csv_header() << "\n";

  harness::TrainOptions opts;
  opts.resume = std::move(resume);
  opts.names = names;
  opts.on_step = [&](const harness::StepLog& s) { csv << harness::loss_csv_row(s) << "\n"; };
  opts.on_epoch_end = [&](const harness::Checkpoint& ck) {
    csv.flush();
    harness::save_checkpoint(ck, ckpt_path);
    std::cout << "epoch " << ck.epoch << " done, step " << ck.step << "\n";
  };
  const harness::TrainResult r = harness::train(c.run, data, opts);
  harness::save_checkpoint(r.checkpoint, ckpt_path);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";

  std::cout << "steps " << r.checkpoint.step;
  if (!r.log.empty()) std::cout << ", final l_total " << fmt("%.6g", r.log.back().losses.l_total);
  if (!r.validation_loss.empty()) std::cout << ", validation l_total " << fmt("%.6g", r.validation_loss.back());
  std::cout << "\ncheckpoint " << ckpt_path.string() << "\n";
  return 0;
}

int run_eval(const GlobalFlags& g, const EvalFlags& f) {
  std::string ckpt_path = f.checkpoint;
  if (ckpt_path.empty() && !g.config_path.empty()) ckpt_path = load_layers(g, CliConfig{}).eval.checkpoint;
  if (ckpt_path.empty()) throw ConfigError("--checkpoint is required");
  if (!fs::exists(ckpt_path)) throw ConfigError("checkpoint not found: " + ckpt_path);
  const harness::Checkpoint ckpt = harness::load_checkpoint(ckpt_path);

  CliConfig c = load_layers(g, base_from_checkpoint(ckpt));
  c.eval.checkpoint = ckpt_path;
  if (!f.data.empty()) c.data = f.data;
  if (f.oracle_crop) c.eval.oracle_crop = true;
  if (!f.dump_frames.empty()) c.eval.dump_frames = f.dump_frames;
  validate(c);

  const std::string trained = ckpt.config.get<harness::RunConfig>().fingerprint();
  const std::string requested = c.run.fingerprint();
  if (trained != requested && !f.force) {
    throw ConfigError("config fingerprint " + requested + " does not match checkpoint " + trained +
                      " (pass --force to evaluate anyway)");
  }

  std::vector<std::string> names;
  const auto data = read_all(expand_datasets(c.data), names);
  write_resolved(g, c, "eval");

  std::ofstream dump;
  harness::EvalOptions opts;
  opts.crop = c.eval.oracle_crop ? harness::CropMode::oracle : harness::CropMode::predicted;
  opts.names = names;
  opts.seed = c.run.seed;
  if (!c.eval.dump_frames.empty()) {
    dump.open(c.eval.dump_frames);
    if (!dump) throw std::runtime_error("cannot write " + c.eval.dump_frames);
    opts.on_frame = [&](const nlohmann::json& j) { dump << j.dump() << "\n"; };
  }

  harness::MetricsReport report;
  if (trained == requested) {
    report = harness::evaluate(ckpt, data, opts);
  } else {
    net::MmbatNet model(c.run.net, body::make_template(c.run.body));
    harness::restore_parameters(ckpt, model);
    report = harness::evaluate(model, data, opts);
    report.config_fingerprint = requested;
    report.warnings.push_back("evaluated with --force: checkpoint fingerprint " + trained);
  }
  const fs::path metrics_path = out_dir(g) / "metrics.json";
  util::write_json_file(metrics_path, report.to_json());
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

  const auto& m = report.overall;
  std::cout << "crop " << report.crop_mode << ", frames " << m.frames << "\n"
            << "MPJRE " << fmt("%.3f", m.mpjre) << " deg, MPJPE " << fmt("%.3f", m.mpjpe) << " cm, MTE "
            << fmt("%.3f", m.mte) << " cm";
  if (m.mpvpe) std::cout << ", MPVPE " << fmt("%.3f", *m.mpvpe) << " cm";
  if (m.mpte) std::cout << ", MPTE " << fmt("%.3f", *m.mpte) << " cm";
  std::cout << "\nmetrics " << metrics_path.string() << "\n";
  return 0;
}

nlohmann::json inspect_dataset(const fs::path& path, const net::NetConfig& net, std::size_t bins,
                               double doppler_range) {
  nlohmann::json rep = {{"file", path.string()}};
  radar::RawSequence seq;
  if (fs::file_size(path) != 0) seq = radar::read_dataset(path);
  rep["frames"] = seq.size();
  rep["channels"] = seq.channels;
  rep["frame_rate"] = seq.frame_rate;
  rep["ground_truth"] = seq.ground_truth.has_value();

  CountStats st;
  std::vector<std::size_t> hist(bins, 0);
  std::size_t below = 0, above = 0, in_box = 0, scored = 0;
  nlohmann::json per_frame = nlohmann::json::array();
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto& fr = seq.frames[t];
    st.add(fr.count());
    std::size_t frame_in = 0;
    const double* center = seq.ground_truth ? seq.ground_truth->params.gamma.values().data() + 3 * t : nullptr;
    for (std::size_t i = 0; i < fr.count(); ++i) {
      const auto p = fr.point(i);
      const double v = p[radar::kDoppler];
      if (v < -doppler_range) ++below;
      else if (v >= doppler_range) ++above;
      else {
        const auto b = static_cast<std::size_t>((v + doppler_range) / (2.0 * doppler_range) * static_cast<double>(bins));
        ++hist[std::min(b, bins - 1)];
      }
      if (center) {
        bool inside = true;
        for (int a = 0; a < 3; ++a) inside = inside && std::abs(p[a] - center[a]) <= 0.5 * net.box[a];
        frame_in += inside ? 1 : 0;
      }
    }
    in_box += frame_in;
    scored += fr.count();
    nlohmann::json row = {{"frame", t}, {"timestamp", fr.timestamp}, {"points", fr.count()}};
    if (center) row["in_box"] = frame_in;
    per_frame.push_back(row);
  }
  rep["points"] = {{"min", st.min}, {"mean", st.mean()}, {"max", st.max}, {"total", st.total}};
  rep["doppler_histogram"] = {{"range", {-doppler_range, doppler_range}}, {"counts", hist}, {"below", below},
                              {"above", above}};
  if (seq.ground_truth) {
    rep["in_box_fraction"] = scored == 0 ? 0.0 : static_cast<double>(in_box) / static_cast<double>(scored);
  } else {
    rep["in_box_fraction"] = nullptr;
  }
  rep["per_frame"] = per_frame;
  return rep;
}

int run_inspect(const GlobalFlags& g, const InspectFlags& f) {
  CliConfig c = load_layers(g, CliConfig{});
  if (!f.data.empty()) c.data = f.data;
  validate(c);
  if (f.bins == 0) throw ConfigError("--bins must be >= 1");
  if (!(f.doppler_range > 0.0)) throw ConfigError("--doppler-range must be > 0");
  const auto paths = expand_datasets(c.data);
  if (paths.empty()) throw ConfigError("no dataset files given");

  std::ofstream csv;
  if (!f.csv.empty()) {
    csv.open(f.csv);
    if (!csv) throw std::runtime_error("cannot write " + f.csv);
    csv << "file,frame,timestamp,points,in_box\n";
  }
  nlohmann::json all = nlohmann::json::array();
  for (const auto& p : paths) {
    nlohmann::json rep;
    try {
      rep = inspect_dataset(p, c.run.net, f.bins, f.doppler_range);
    } catch (const FormatError& e) {
      throw std::runtime_error("malformed dataset " + p.string() + ": " + e.what());
    }
    std::cout << p.string() << "\n  frames " << rep["frames"].get<std::size_t>();
    if (rep["frames"].get<std::size_t>() > 0) {
      std::cout << ", channels " << rep["channels"].get<std::size_t>() << ", rate "
                << fmt("%g", rep["frame_rate"].get<double>()) << " Hz\n  points/frame min "
                << rep["points"]["min"].get<std::size_t>() << " mean " << fmt("%.1f", rep["points"]["mean"].get<double>())
                << " max " << rep["points"]["max"].get<std::size_t>() << "\n  doppler [m/s]:";
      const auto counts = rep["doppler_histogram"]["counts"].get<std::vector<std::size_t>>();
      const double w = 2.0 * f.doppler_range / static_cast<double>(f.bins);
      for (std::size_t b = 0; b < counts.size(); ++b) {
        std::cout << "\n    [" << fmt("%+.2f", -f.doppler_range + w * static_cast<double>(b)) << ", "
                  << fmt("%+.2f", -f.doppler_range + w * static_cast<double>(b + 1)) << ") " << counts[b];
      }
      std::cout << "\n    below " << rep["doppler_histogram"]["below"].get<std::size_t>() << ", above "
                << rep["doppler_histogram"]["above"].get<std::size_t>();
      if (!rep["in_box_fraction"].is_null()) {
        std::cout << "\n  in-box fraction " << fmt("%.4f", rep["in_box_fraction"].get<double>());
      } else {
        std::cout << "\n  in-box fraction n/a (no ground truth)";
      }
    }
    std::cout << "\n";
    if (csv.is_open()) {
      for (const auto& row : rep["per_frame"]) {
        csv << p.string() << "," << row["frame"].get<std::size_t>() << "," << fmt("%.17g", row["timestamp"].get<double>())
            << "," << row["points"].get<std::size_t>() << ",";
        if (row.contains("in_box")) csv << row["in_box"].get<std::size_t>();
        csv << "\n";
      }
    }
    all.push_back(std::move(rep));
  }
  if (!g.out.empty()) {
    write_resolved(g, c, "inspect");
    util::write_json_file(out_dir(g) / "inspect.json", all);
  }
  return 0;
}

}  // namespace mmbat::cli
