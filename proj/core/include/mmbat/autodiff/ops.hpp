#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mmbat/autodiff/tensor.hpp"

namespace mmbat::ad {

// Binary elementwise ops broadcast numpy-style (right-aligned extents, 1 or
// missing axes stretch). The common case in this codebase is a trailing-axis
// vector broadcast over rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }

Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor square(const Tensor& a);
/// acos(clamp(x, lo, hi)); the derivative is zero where the clamp is active.
Tensor acos_clamped(const Tensor& a, double lo, double hi);

enum class OpCode { add, mul, relu, sigmoid, tanh };
/// Dispatching front end over the elementwise kernels above.
Tensor elementwise(OpCode op, const Tensor& a, const std::optional<Tensor>& b = std::nullopt);

/// Plain 2-D product [m x k] . [k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// Batched product over identical leading extents: [..., m, k] . [..., k, n].
Tensor batched_matmul(const Tensor& a, const Tensor& b);
Tensor transpose_last2(const Tensor& a);
Tensor permute(const Tensor& a, const std::vector<std::size_t>& axes);
Tensor reshape(const Tensor& a, Shape shape);
Tensor broadcast_to(const Tensor& a, const Shape& shape);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum_axis(const Tensor& a, std::ptrdiff_t axis, bool keepdim = false);
Tensor mean_axis(const Tensor& a, std::ptrdiff_t axis, bool keepdim = false);

/// Numerically stable softmax (max subtraction) along one axis.
Tensor softmax(const Tensor& a, std::ptrdiff_t axis);

Tensor concat(const std::vector<Tensor>& parts, std::ptrdiff_t axis);
Tensor concat_last_axis(const std::vector<Tensor>& parts);
Tensor slice(const Tensor& a, std::ptrdiff_t axis, std::size_t start, std::size_t length);
/// Row gather from a rank-2 tensor; the backward pass scatter-adds.
Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows);

/// Affine map over the last axis: x[..., din] . W[din x dout] + b[dout].
/// An undefined bias means no bias term.
Tensor linear_layer(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

/// Inverted dropout. Each element's keep decision is a pure function of
/// (seed, element index), so a given seed always produces the same mask.
Tensor dropout(const Tensor& x, double ratio, bool training, std::uint64_t seed);

}  // namespace mmbat::ad
