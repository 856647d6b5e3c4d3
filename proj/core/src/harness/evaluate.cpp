#include "mmbat/harness/evaluate.hpp"

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/errors.hpp"
#include "mmbat/harness/train.hpp"
#include "mmbat/harness/windows.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::harness {
namespace {

std::vector<std::string> fill_names(std::vector<std::string> names, std::size_t n) {
  for (std::size_t i = names.size(); i < n; ++i) names.push_back("seq" + std::to_string(i));
  return names;
}

std::vector<double> row_values(const ad::Tensor& t, std::size_t row) {
  const std::size_t stride = t.numel() / t.dim(0);
  const auto v = t.values().subspan(row * stride, stride);
  return {v.begin(), v.end()};
}

// Same parameters with beta replaced by its mean over each window.
net::BodyEstimate beta_window_mean(const body::BodyTemplate& tmpl, const net::BodyEstimate& e, std::size_t window) {
  const std::size_t f = e.params.frames(), nb = e.params.beta.dim(1);
  std::vector<double> beta(e.params.beta.values().begin(), e.params.beta.values().end());
  for (std::size_t w = 0; w + window <= f; w += window) {
    for (std::size_t k = 0; k < nb; ++k) {
      double m = 0.0;
      for (std::size_t i = w; i < w + window; ++i) m += beta[i * nb + k];
      m /= static_cast<double>(window);
      for (std::size_t i = w; i < w + window; ++i) beta[i * nb + k] = m;
    }
  }
  body::BodyParams p{e.params.theta.detach(), ad::Tensor::from({f, nb}, std::move(beta)), e.params.gamma.detach()};
  return net::evaluate_body(tmpl, p);
}

}  // namespace

std::vector<SequencePrediction> predict(const net::MmbatNet& model, const std::vector<radar::RawSequence>& data,
                                        const EvalOptions& options, std::vector<std::string>& warnings) {
  const net::NetConfig& cfg = model.config();
  const std::size_t t = cfg.window;
  const auto names = fill_names(options.names, data.size());
  std::vector<SequencePrediction> out;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const radar::RawSequence& seq = data[s];
    if (seq.channels != cfg.channels) {
      throw ContractError("sequence '" + names[s] + "' has " + std::to_string(seq.channels) +
                          " channels, the network expects " + std::to_string(cfg.channels));
    }
    if (options.crop == CropMode::predicted && !seq.initial_box_center) {
      throw ContractError("sequence '" + names[s] + "' has no initial_box_center");
    }
    const std::size_t k_windows = seq.size() / t;
    if (k_windows == 0) {
      warnings.push_back("sequence '" + names[s] + "' is shorter than one window and was not scored");
      out.push_back({});
      continue;
    }
    if (seq.size() % t != 0) {
      warnings.push_back("sequence '" + names[s] + "': last " + std::to_string(seq.size() % t) +
                         " frames do not fill a window and were not scored");
    }
    std::vector<net::BodyEstimate> bodies;
    std::vector<ad::Tensor> translations;
    SequencePrediction pred;
    std::vector<double> centers;
    if (options.crop == CropMode::predicted) {
      for (std::size_t i = 0; i < t; ++i) centers.insert(centers.end(), seq.initial_box_center->begin(), seq.initial_box_center->end());
    }
    for (std::size_t k = 0; k < k_windows; ++k) {
      const std::size_t start = k * t;
      if (options.crop == CropMode::oracle) centers = truth_centers(seq, start, t);
      const net::ProcessedSequence input = net::crop_window(
          std::span(seq.frames).subspan(start, t), centers, t, cfg.points, util::derive_seed(options.seed, {s, k}),
          cfg.box, start,
          options.crop == CropMode::oracle ? net::CropSource::ground_truth
                                           : (k == 0 ? net::CropSource::initial_box : net::CropSource::predicted));
      const net::NetOutput o = model.forward(std::span(&input, 1), net::ForwardMode{});
      net::BodyEstimate body{{o.body.params.theta.detach(), o.body.params.beta.detach(), o.body.params.gamma.detach()},
                             o.body.rotations.detach(), o.body.joints.detach(), o.body.vertices.detach()};
      const ad::Tensor next = ad::reshape(o.translation, {t, 3}).detach();
      if (options.on_frame) {
        for (std::size_t i = 0; i < t; ++i) {
          nlohmann::json line = {{"sequence", names[s]},
                                 {"frame", start + i},
                                 {"timestamp", seq.frames[start + i].timestamp},
                                 {"crop_center", std::vector<double>(centers.begin() + i * 3, centers.begin() + i * 3 + 3)},
                                 {"joints", row_values(body.joints, i)},
                                 {"vertices", row_values(body.vertices, i)},
                                 {"gamma", row_values(body.params.gamma, i)},
                                 {"gamma_p_next", row_values(next, i)}};
          options.on_frame(line);
        }
      }
      pred.crop_centers.insert(pred.crop_centers.end(), centers.begin(), centers.end());
      bodies.push_back(std::move(body));
      translations.push_back(next);
      if (options.crop == CropMode::predicted) centers.assign(next.values().begin(), next.values().end());
    }
    pred.body = stack_frames(bodies);
    pred.next_translation = stack_rows(translations);
    out.push_back(std::move(pred));
  }
  return out;
}

MetricsReport score_predictions(const body::BodyTemplate& tmpl, const std::vector<SequencePrediction>& predictions,
                                const std::vector<radar::RawSequence>& data, std::size_t window,
                                const std::vector<std::string>& names_in) {
  if (predictions.size() != data.size()) throw DimensionError("one prediction per sequence is required");
  const auto names = fill_names(names_in, data.size());
  MetricsReport report;
  MetricSums all, all_beta;
  std::size_t all_frames = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const SequencePrediction& p = predictions[s];
    SequenceMetrics sm;
    sm.name = names[s];
    if (!p.body.joints.defined()) {
      report.sequences.push_back(sm);
      continue;
    }
    const std::size_t frames = p.body.joints.dim(0);
    if (frames % window != 0 || frames > data[s].size()) {
      throw DimensionError("prediction for '" + names[s] + "' does not cover whole windows of the sequence");
    }
    const net::BodyEstimate truth = take_frames(ground_truth_estimate(tmpl, data[s], names[s]), 0, frames);
    MetricSums sums = accumulate_body(p.body.rotations, truth.rotations, p.body.joints, truth.joints,
                                      p.body.vertices, truth.vertices);
    const net::BodyEstimate averaged = beta_window_mean(tmpl, p.body, window);
    MetricSums beta_sums = accumulate_body(averaged.rotations, truth.rotations, averaged.joints, truth.joints,
                                           averaged.vertices, truth.vertices);
    if (frames > window) {
      const MetricSums tr = accumulate_translation(take_rows(p.next_translation, 0, frames - window),
                                                   take_rows(truth.params.gamma, window, frames - window));
      sums += tr;
      beta_sums += tr;
    }
    sm.values = MetricValues::from_sums(sums, frames);
    sm.beta_window_mean = MetricValues::from_sums(beta_sums, frames);
    all += sums;
    all_beta += beta_sums;
    all_frames += frames;
    report.sequences.push_back(std::move(sm));
  }
  report.overall = MetricValues::from_sums(all, all_frames);
  report.beta_window_mean = MetricValues::from_sums(all_beta, all_frames);
  return report;
}

MetricsReport evaluate(const net::MmbatNet& model, const std::vector<radar::RawSequence>& data,
                       const EvalOptions& options) {
  std::vector<std::string> warnings;
  const auto preds = predict(model, data, options, warnings);
  MetricsReport r = score_predictions(model.body_template(), preds, data, model.config().window, options.names);
  r.crop_mode = options.crop == CropMode::oracle ? "oracle" : "predicted";
  r.warnings = std::move(warnings);
  return r;
}

MetricsReport evaluate(const Checkpoint& ckpt, const std::vector<radar::RawSequence>& data,
                       const EvalOptions& options) {
  RunConfig cfg;
  const net::MmbatNet model = model_from_checkpoint(ckpt, &cfg);
  MetricsReport r = evaluate(model, data, options);
  r.config_fingerprint = cfg.fingerprint();
  return r;
}

}  // namespace mmbat::harness
