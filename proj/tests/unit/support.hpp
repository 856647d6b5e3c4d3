#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <doctest.h>

#include "mmbat/autodiff/ops.hpp"
#include "mmbat/autodiff/tensor.hpp"

namespace mmbat::test {

inline std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline ad::Tensor random_tensor(ad::Shape shape, std::uint64_t seed, bool grad = true, double lo = -1.0,
                                double hi = 1.0) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return ad::Tensor::from(std::move(shape), uniform(n, seed, lo, hi), grad);
}

/// Worst norm-wise relative error between analytic gradients and central
/// differences over every input. `f` must map the inputs to a scalar.
inline double gradient_error(const std::function<ad::Tensor(const std::vector<ad::Tensor>&)>& f,
                             std::vector<ad::Tensor> inputs, double h = 1e-5) {
  for (auto& t : inputs) t.zero_grad();
  ad::backward(f(inputs));
  double worst = 0.0;
  for (auto& x : inputs) {
    if (!x.requires_grad()) continue;
    std::vector<double> analytic(x.numel(), 0.0);
    if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
    double diff = 0.0, na = 0.0, nn = 0.0;
    auto w = x.mutable_values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      w[i] = keep + h;
      const double up = f(inputs).item();
      w[i] = keep - h;
      const double down = f(inputs).item();
      w[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      diff += (numeric - analytic[i]) * (numeric - analytic[i]);
      na += analytic[i] * analytic[i];
      nn += numeric * numeric;
    }
    const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-8});
    worst = std::max(worst, std::sqrt(diff) / scale);
  }
  return worst;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace mmbat::test
