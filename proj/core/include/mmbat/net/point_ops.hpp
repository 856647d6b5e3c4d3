#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmbat::net {

/// Greedy max-min sampling over `points` (n x 3, row-major). Starts at
/// `start_index`; each step picks the point with the largest squared
/// distance to the selected set, lowest index on ties.
std::vector<std::size_t> farthest_point_sample(std::span<const double> points, std::size_t k,
                                               std::size_t start_index);

/// Index of the point closest to the centroid (lowest index on ties).
std::size_t nearest_to_centroid(std::span<const double> points);

struct BallGroups {
  std::size_t group_size = 0;
  std::vector<std::size_t> indices;  // centers x group_size
  std::vector<std::size_t> found;    // members inside the ball per center, before padding
};

/// For each center, the first `group_size` points (by index) within the
/// closed ball of `radius`. Short groups are padded with their first member;
/// an empty ball is filled with the center's nearest point.
BallGroups ball_query(std::span<const double> points, std::span<const double> centers, double radius,
                      std::size_t group_size);

}  // namespace mmbat::net
