#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmbat/harness/checkpoint.hpp"
#include "mmbat/harness/metrics.hpp"
#include "mmbat/harness/run_config.hpp"
#include "mmbat/net/mmbat_net.hpp"

namespace mmbat::harness {

enum class CropMode {
  predicted,  // window 0 from the initial box, window k+1 from gamma_p of window k
  oracle,     // every window cropped around the ground-truth root translation
};

/// Predictions for the scored frames of one sequence: K full windows.
struct SequencePrediction {
  net::BodyEstimate body;            // K * T frames
  ad::Tensor next_translation;       // [K * T, 3]; row block k is gamma_p made by window k
  std::vector<double> crop_centers;  // K * T x 3
};

struct EvalOptions {
  CropMode crop = CropMode::predicted;
  std::vector<std::string> names;
  std::uint64_t seed = 0;  // crop sampling
  /// Receives one JSON object per scored frame (joints, vertices, gamma_p, crop center).
  std::function<void(const nlohmann::json&)> on_frame;
};

/// Runs the network window by window over every sequence.
std::vector<SequencePrediction> predict(const net::MmbatNet& model, const std::vector<radar::RawSequence>& data,
                                        const EvalOptions& options, std::vector<std::string>& warnings);

/// Metrics of given predictions against ground truth. MPTE compares the
/// translation predicted by window k - 1 with the truth of window k, k >= 1.
MetricsReport score_predictions(const body::BodyTemplate& tmpl, const std::vector<SequencePrediction>& predictions,
                                const std::vector<radar::RawSequence>& data, std::size_t window,
                                const std::vector<std::string>& names);

MetricsReport evaluate(const net::MmbatNet& model, const std::vector<radar::RawSequence>& data,
                       const EvalOptions& options = {});
MetricsReport evaluate(const Checkpoint& ckpt, const std::vector<radar::RawSequence>& data,
                       const EvalOptions& options = {});

}  // namespace mmbat::harness
