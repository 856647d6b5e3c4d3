#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mmbat/radar/types.hpp"

namespace mmbat::net {

enum class CropSource { ground_truth, predicted, initial_box };

/// Fixed-size network input for one window: exactly `points` points of
/// `channels` values per frame, in absolute radar coordinates.
struct ProcessedSequence {
  std::size_t window = 0;
  std::size_t points = 0;
  std::size_t channels = 0;
  std::vector<double> data;     // window x points x channels
  std::vector<double> centers;  // window x 3, the crop centers used
  std::size_t window_start = 0;
  CropSource source = CropSource::ground_truth;

  bool operator==(const ProcessedSequence&) const = default;
};

/// Crops the first `window` frames of `frames` with closed axis-aligned boxes
/// of extent `box` around the per-frame `centers` and resamples every crop to
/// exactly `points` points:
///   count > N      N distinct points drawn uniformly, kept in original order
///   0 < count < N  cyclic repetition from a seeded start offset
///   count == 0     the most recent non-empty crop of the window is reused;
///                  without one, the N points nearest the center (cycled if
///                  the frame is smaller, the bare center if it is empty)
/// Randomness is keyed by (seed, frame offset), so equal inputs give
/// bitwise-equal outputs.
ProcessedSequence crop_window(std::span<const radar::PointFrame> frames, std::span<const double> centers,
                              std::size_t window, std::size_t points, std::uint64_t seed,
                              const std::array<double, 3>& box = {1.0, 1.0, 3.0}, std::size_t window_start = 0,
                              CropSource source = CropSource::ground_truth);

}  // namespace mmbat::net
