#include "mmbat/net/point_ops.hpp"

#include <limits>
#include <string>

#include "mmbat/errors.hpp"

namespace mmbat::net {
namespace {

double dist2(const double* a, const double* b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

std::size_t count_points(std::span<const double> points, const char* what) {
  if (points.size() % 3 != 0) throw DimensionError(std::string(what) + " must be n x 3");
  return points.size() / 3;
}

}  // namespace

std::vector<std::size_t> farthest_point_sample(std::span<const double> points, std::size_t k,
                                               std::size_t start_index) {
  const std::size_t n = count_points(points, "farthest_point_sample points");
  if (k < 1 || k > n) {
    throw ContractError("farthest_point_sample needs 1 <= k <= N (k=" + std::to_string(k) +
                        ", N=" + std::to_string(n) + ")");
  }
  if (start_index >= n) throw ContractError("farthest_point_sample start index out of range");
  std::vector<std::size_t> picked{start_index};
  picked.reserve(k);
  std::vector<double> mind(n, std::numeric_limits<double>::infinity());
  std::size_t last = start_index;
  while (picked.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dist2(&points[i * 3], &points[last * 3]);
      if (d < mind[i]) mind[i] = d;
      if (mind[i] > best_d) {
        best_d = mind[i];
        best = i;
      }
    }
    picked.push_back(best);
    last = best;
  }
  return picked;
}

std::size_t nearest_to_centroid(std::span<const double> points) {
  const std::size_t n = count_points(points, "points");
  if (n == 0) throw ContractError("nearest_to_centroid needs at least one point");
  double c[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) c[a] += points[i * 3 + a];
  }
  for (double& x : c) x /= static_cast<double>(n);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = dist2(&points[i * 3], c);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

BallGroups ball_query(std::span<const double> points, std::span<const double> centers, double radius,
                      std::size_t group_size) {
  const std::size_t n = count_points(points, "ball_query points");
  const std::size_t m = count_points(centers, "ball_query centers");
  if (!(radius > 0.0)) throw ContractError("ball_query radius must be > 0");
  if (group_size == 0) throw ContractError("ball_query group size must be >= 1");
  if (n == 0) throw ContractError("ball_query needs at least one point");
  const double r2 = radius * radius;
  BallGroups g;
  g.group_size = group_size;
  g.indices.reserve(m * group_size);
  g.found.reserve(m);
  for (std::size_t c = 0; c < m; ++c) {
    const double* ctr = &centers[c * 3];
    const std::size_t begin = g.indices.size();
    std::size_t nearest = 0;
    double nearest_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n && g.indices.size() - begin < group_size; ++i) {
      const double d = dist2(&points[i * 3], ctr);
      if (d <= r2) g.indices.push_back(i);
      if (d < nearest_d) {
        nearest_d = d;
        nearest = i;
      }
    }
    const std::size_t found = g.indices.size() - begin;
    g.found.push_back(found);
    if (found == 0) {
      // The scan above ran to the end, so `nearest` is exact.
      g.indices.insert(g.indices.end(), group_size, nearest);
    } else {
      const std::size_t first = g.indices[begin];
      g.indices.insert(g.indices.end(), group_size - found, first);
    }
  }
  return g;
}

}  // namespace mmbat::net
