#include "mmbat/net/crop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mmbat/errors.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::net {
namespace {

void append_point(std::vector<double>& out, const radar::PointFrame& f, std::size_t i) {
  const auto p = f.point(i);
  out.insert(out.end(), p.begin(), p.end());
}

}  // namespace

ProcessedSequence crop_window(std::span<const radar::PointFrame> frames, std::span<const double> centers,
                              std::size_t window, std::size_t points, std::uint64_t seed,
                              const std::array<double, 3>& box, std::size_t window_start, CropSource source) {
  if (window == 0 || points == 0) throw ContractError("crop_window needs window >= 1 and points >= 1");
  if (frames.size() < window) {
    throw ContractError("crop_window needs " + std::to_string(window) + " frames, got " +
                        std::to_string(frames.size()));
  }
  if (centers.size() != window * 3) throw DimensionError("crop_window expects one 3-vector center per frame");
  const std::size_t c = frames[0].channels;
  if (c < 3) throw DimensionError("point frames need at least 3 channels");

  ProcessedSequence out;
  out.window = window;
  out.points = points;
  out.channels = c;
  out.window_start = window_start;
  out.source = source;
  out.centers.assign(centers.begin(), centers.end());
  out.data.reserve(window * points * c);
  std::ptrdiff_t last_nonempty = -1;

  for (std::size_t t = 0; t < window; ++t) {
    const radar::PointFrame& f = frames[t];
    if (f.channels != c) throw DimensionError("frames in a window must share the channel count");
    const double* ctr = &centers[t * 3];
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < f.count(); ++i) {
      const auto p = f.point(i);
      bool in = true;
      for (int a = 0; a < 3; ++a) in = in && std::abs(p[a] - ctr[a]) <= 0.5 * box[a];
      if (in) inside.push_back(i);
    }
    std::mt19937_64 rng(util::derive_seed(seed, {t}));
    const std::size_t count = inside.size();

    if (count >= points) {
      if (count > points) {
        // Partial Fisher-Yates, then restore the original order.
        for (std::size_t i = 0; i < points; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, count - 1);
          std::swap(inside[i], inside[pick(rng)]);
        }
        inside.resize(points);
        std::sort(inside.begin(), inside.end());
      }
      for (std::size_t i : inside) append_point(out.data, f, i);
      last_nonempty = static_cast<std::ptrdiff_t>(t);
    } else if (count > 0) {
      const std::size_t start = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
      for (std::size_t j = 0; j < points; ++j) append_point(out.data, f, inside[(start + j) % count]);
      last_nonempty = static_cast<std::ptrdiff_t>(t);
    } else if (last_nonempty >= 0) {
      const std::size_t stride = points * c;
      const std::size_t from = static_cast<std::size_t>(last_nonempty) * stride;
      out.data.insert(out.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(from),
                      out.data.begin() + static_cast<std::ptrdiff_t>(from + stride));
    } else if (f.count() > 0) {
      std::vector<std::size_t> order(f.count());
      std::iota(order.begin(), order.end(), 0);
      std::vector<double> d(f.count());
      for (std::size_t i = 0; i < f.count(); ++i) {
        const auto p = f.point(i);
        d[i] = 0.0;
        for (int a = 0; a < 3; ++a) d[i] += (p[a] - ctr[a]) * (p[a] - ctr[a]);
      }
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
      const std::size_t take = std::min(points, order.size());
      for (std::size_t j = 0; j < points; ++j) append_point(out.data, f, order[j % take]);
    } else {
      for (std::size_t j = 0; j < points; ++j) {
        out.data.insert(out.data.end(), ctr, ctr + 3);
        out.data.insert(out.data.end(), c - 3, 0.0);
      }
    }
  }
  return out;
}

}  // namespace mmbat::net
