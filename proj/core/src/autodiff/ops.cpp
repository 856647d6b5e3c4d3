#include "mmbat/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmbat/errors.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::ad {

namespace {

std::size_t norm_axis(std::ptrdiff_t axis, std::size_t rank, const Shape& shape) {
  const auto r = static_cast<std::ptrdiff_t>(rank);
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape));
  }
  return static_cast<std::size_t>(axis);
}

// outer x axis x inner decomposition around one axis.
struct AxisSplit {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

std::vector<std::size_t> row_major_strides(const Shape& shape) {
  std::vector<std::size_t> st(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) st[i - 1] = st[i] * shape[i];
  return st;
}

// Strides of `in` laid against `out` (right-aligned); zero where broadcast.
std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> st(out.size(), 0);
  const auto in_st = row_major_strides(in);
  const std::size_t off = out.size() - in.size();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] != 1) st[off + i] = in_st[i];
  }
  return st;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t ea = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const std::size_t eb = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw DimensionError("incompatible shapes " + shape_str(a) + " and " + shape_str(b));
    }
    out[i] = ea == 1 ? eb : ea;
  }
  return out;
}

// Calls fn(out_index, a_index, b_index) over every output element.
template <typename Fn>
void for_each_broadcast(const Shape& out, const Shape& sa, const Shape& sb, Fn&& fn) {
  const std::size_t n = shape_numel(out);
  if (n == 0) return;
  if (sa == out && sb == out) {
    for (std::size_t i = 0; i < n; ++i) fn(i, i, i);
    return;
  }
  const std::size_t nb = shape_numel(sb);
  if (sa == out && sb.size() <= out.size() &&
      std::equal(sb.begin(), sb.end(), out.end() - static_cast<std::ptrdiff_t>(sb.size()))) {
    for (std::size_t i = 0; i < n; ++i) fn(i, i, i % nb);
    return;
  }
  const auto ast = broadcast_strides(sa, out);
  const auto bst = broadcast_strides(sb, out);
  const std::size_t r = out.size();
  std::vector<std::size_t> idx(r, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t o = 0; o < n; ++o) {
    fn(o, ia, ib);
    for (std::size_t d = r; d-- > 0;) {
      if (++idx[d] < out[d]) {
        ia += ast[d];
        ib += bst[d];
        break;
      }
      ia -= ast[d] * (out[d] - 1);
      ib -= bst[d] * (out[d] - 1);
      idx[d] = 0;
    }
  }
}

template <typename Fwd, typename Bwd>
Tensor binary(const Tensor& a, const Tensor& b, Fwd fwd, Bwd bwd) {
  Shape out = broadcast_shape(a.shape(), b.shape());
  std::vector<double> v(shape_numel(out));
  const auto av = a.values();
  const auto bv = b.values();
  for_each_broadcast(out, a.shape(), b.shape(),
                     [&](std::size_t o, std::size_t ia, std::size_t ib) { v[o] = fwd(av[ia], bv[ib]); });
  return make_result(out, std::move(v), {a, b}, [out, bwd](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    std::span<double> ga, gb;
    if (pa.requires_grad) ga = pa.grad_buffer();
    if (pb.requires_grad) gb = pb.grad_buffer();
    const auto& av = pa.value;
    const auto& bv = pb.value;
    for_each_broadcast(out, pa.shape, pb.shape, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      double da = 0.0, db = 0.0;
      bwd(av[ia], bv[ib], n.value[o], n.grad[o], da, db);
      if (!ga.empty()) ga[ia] += da;
      if (!gb.empty()) gb[ib] += db;
    });
  });
}

// dfn(x, y) returns dy/dx.
template <typename Fwd, typename Dfn>
Tensor unary(const Tensor& a, Fwd fwd, Dfn dfn) {
  const auto av = a.values();
  std::vector<double> v(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) v[i] = fwd(av[i]);
  return make_result(a.shape(), std::move(v), {a}, [dfn](Node& n) {
    Node& p = *n.parents[0];
    auto g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * dfn(p.value[i], n.value[i]);
  });
}

// C[m x n] += A[m x k] . B[k x n]
void gemm_nn(const double* A, const double* B, double* C, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* c = C + i * n;
    const double* a = A + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = a[p];
      if (s == 0.0) continue;
      const double* b = B + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += s * b[j];
    }
  }
}

// C[m x n] += A[m x k] . B[n x k]^T
void gemm_nt(const double* A, const double* B, double* C, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* a = A + i * k;
    double* c = C + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* b = B + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p] * b[p];
      c[j] += s;
    }
  }
}

// C[m x n] += A[k x m]^T . B[k x n]
void gemm_tn(const double* A, const double* B, double* C, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* a = A + p * m;
    const double* b = B + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = a[i];
      if (s == 0.0) continue;
      double* c = C + i * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += s * b[j];
    }
  }
}

void require_same_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         shape_str(t.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x + y; },
      [](double, double, double, double g, double& da, double& db) {
        da = g;
        db = g;
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x - y; },
      [](double, double, double, double g, double& da, double& db) {
        da = g;
        db = -g;
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x * y; },
      [](double x, double y, double, double g, double& da, double& db) {
        da = g * y;
        db = g * x;
      });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x / y; },
      [](double x, double y, double, double g, double& da, double& db) {
        da = g / y;
        db = -g * x / (y * y);
      });
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor abs(const Tensor& a) {
  return unary(
      a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sqrt(const Tensor& a) {
  return unary(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor acos_clamped(const Tensor& a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::acos(std::clamp(x, lo, hi)); },
      [lo, hi](double x, double) {
        if (x <= lo || x >= hi) return 0.0;
        return -1.0 / std::sqrt(1.0 - x * x);
      });
}

Tensor elementwise(OpCode op, const Tensor& a, const std::optional<Tensor>& b) {
  const bool binary_op = op == OpCode::add || op == OpCode::mul;
  if (binary_op && !b) throw ContractError("elementwise: binary op requires a second operand");
  switch (op) {
    case OpCode::add: return add(a, *b);
    case OpCode::mul: return mul(a, *b);
    case OpCode::relu: return relu(a);
    case OpCode::sigmoid: return sigmoid(a);
    case OpCode::tanh: return tanh(a);
  }
  throw ContractError("elementwise: unknown op code");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> v(m * n, 0.0);
  gemm_nn(a.values().data(), b.values().data(), v.data(), m, k, n);
  return make_result({m, n}, std::move(v), {a, b}, [m, k, n](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    if (pa.requires_grad) gemm_nt(out.grad.data(), pb.value.data(), pa.grad_buffer().data(), m, n, k);
    if (pb.requires_grad) gemm_tn(pa.value.data(), out.grad.data(), pb.grad_buffer().data(), k, m, n);
  });
}

Tensor batched_matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || a.rank() != b.rank() ||
      !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin()) || a.dim(-1) != b.dim(-2)) {
    throw DimensionError("batched_matmul: cannot multiply " + shape_str(a.shape()) + " by " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.dim(-2), k = a.dim(-1), n = b.dim(-1);
  const std::size_t batch = a.numel() / (m * k);
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<double> v(batch * m * n, 0.0);
  for (std::size_t s = 0; s < batch; ++s) {
    gemm_nn(a.values().data() + s * m * k, b.values().data() + s * k * n, v.data() + s * m * n, m, k, n);
  }
  return make_result(out_shape, std::move(v), {a, b}, [batch, m, k, n](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    for (std::size_t s = 0; s < batch; ++s) {
      const double* g = out.grad.data() + s * m * n;
      if (pa.requires_grad) {
        gemm_nt(g, pb.value.data() + s * k * n, pa.grad_buffer().data() + s * m * k, m, n, k);
      }
      if (pb.requires_grad) {
        gemm_tn(pa.value.data() + s * m * k, g, pb.grad_buffer().data() + s * k * n, k, m, n);
      }
    }
  });
}

Tensor permute(const Tensor& a, const std::vector<std::size_t>& axes) {
  const std::size_t r = a.rank();
  if (axes.size() != r) throw DimensionError("permute: axis list does not match shape " + shape_str(a.shape()));
  std::vector<bool> used(r, false);
  for (std::size_t ax : axes) {
    if (ax >= r || used[ax]) throw DimensionError("permute: invalid axis order");
    used[ax] = true;
  }
  const auto in_st = row_major_strides(a.shape());
  Shape out_shape(r);
  std::vector<std::size_t> st(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = a.shape()[axes[i]];
    st[i] = in_st[axes[i]];
  }
  const std::size_t n = a.numel();
  // src[o] = input offset for output element o
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t off = 0;
  for (std::size_t o = 0; o < n; ++o) {
    src[o] = off;
    for (std::size_t d = r; d-- > 0;) {
      if (++idx[d] < out_shape[d]) {
        off += st[d];
        break;
      }
      off -= st[d] * (out_shape[d] - 1);
      idx[d] = 0;
    }
  }
  std::vector<double> v(n);
  const auto av = a.values();
  for (std::size_t o = 0; o < n; ++o) v[o] = av[src[o]];
  return make_result(out_shape, std::move(v), {a}, [src = std::move(src)](Node& out) {
    auto g = out.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < src.size(); ++o) g[src[o]] += out.grad[o];
  });
}

Tensor transpose_last2(const Tensor& a) {
  if (a.rank() < 2) throw DimensionError("transpose_last2: rank < 2 for shape " + shape_str(a.shape()));
  std::vector<std::size_t> axes(a.rank());
  std::iota(axes.begin(), axes.end(), 0);
  std::swap(axes[a.rank() - 1], axes[a.rank() - 2]);
  return permute(a, axes);
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " to " + shape_str(shape));
  }
  std::vector<double> v(a.values().begin(), a.values().end());
  return make_result(std::move(shape), std::move(v), {a}, [](Node& out) {
    auto g = out.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
  });
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
  if (broadcast_shape(a.shape(), shape) != shape) {
    throw DimensionError("broadcast_to: " + shape_str(a.shape()) + " to " + shape_str(shape));
  }
  std::vector<double> v(shape_numel(shape));
  const auto av = a.values();
  for_each_broadcast(shape, a.shape(), a.shape(), [&](std::size_t o, std::size_t ia, std::size_t) { v[o] = av[ia]; });
  return make_result(shape, std::move(v), {a}, [shape](Node& out) {
    Node& p = *out.parents[0];
    auto g = p.grad_buffer();
    for_each_broadcast(shape, p.shape, p.shape, [&](std::size_t o, std::size_t ia, std::size_t) { g[ia] += out.grad[o]; });
  });
}

Tensor sum(const Tensor& a) {
  const auto av = a.values();
  const double s = std::accumulate(av.begin(), av.end(), 0.0);
  return make_result({}, {s}, {a}, [](Node& out) {
    auto g = out.parents[0]->grad_buffer();
    for (double& x : g) x += out.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum_axis(const Tensor& a, std::ptrdiff_t axis, bool keepdim) {
  const std::size_t ax = norm_axis(axis, a.rank(), a.shape());
  const AxisSplit s = split_at(a.shape(), ax);
  Shape out_shape = a.shape();
  if (keepdim) {
    out_shape[ax] = 1;
  } else {
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  }
  std::vector<double> v(s.outer * s.inner, 0.0);
  const auto av = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t l = 0; l < s.len; ++l) {
      const double* src = av.data() + (o * s.len + l) * s.inner;
      double* dst = v.data() + o * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
    }
  }
  return make_result(out_shape, std::move(v), {a}, [s](Node& out) {
    auto g = out.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t l = 0; l < s.len; ++l) {
        double* dst = g.data() + (o * s.len + l) * s.inner;
        const double* src = out.grad.data() + o * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Tensor mean_axis(const Tensor& a, std::ptrdiff_t axis, bool keepdim) {
  const std::size_t ax = norm_axis(axis, a.rank(), a.shape());
  return scale(sum_axis(a, axis, keepdim), 1.0 / static_cast<double>(a.shape()[ax]));
}

Tensor softmax(const Tensor& a, std::ptrdiff_t axis) {
  const std::size_t ax = norm_axis(axis, a.rank(), a.shape());
  const AxisSplit s = split_at(a.shape(), ax);
  const auto av = a.values();
  std::vector<double> v(av.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.len * s.inner + i;
      double mx = -INFINITY;
      for (std::size_t l = 0; l < s.len; ++l) mx = std::max(mx, av[base + l * s.inner]);
      double z = 0.0;
      for (std::size_t l = 0; l < s.len; ++l) {
        const double e = std::exp(av[base + l * s.inner] - mx);
        v[base + l * s.inner] = e;
        z += e;
      }
      for (std::size_t l = 0; l < s.len; ++l) v[base + l * s.inner] /= z;
    }
  }
  return make_result(a.shape(), std::move(v), {a}, [s](Node& out) {
    auto g = out.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.len * s.inner + i;
        double dot = 0.0;
        for (std::size_t l = 0; l < s.len; ++l) dot += out.grad[base + l * s.inner] * out.value[base + l * s.inner];
        for (std::size_t l = 0; l < s.len; ++l) {
          const std::size_t k = base + l * s.inner;
          g[k] += out.value[k] * (out.grad[k] - dot);
        }
      }
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::ptrdiff_t axis) {
  if (parts.empty()) throw ContractError("concat: no parts");
  const Shape& ref = parts.front().shape();
  const std::size_t ax = norm_axis(axis, ref.size(), ref);
  Shape out_shape = ref;
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == ref.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == ax || s[i] == ref[i];
    if (!ok) {
      throw DimensionError("concat: part of shape " + shape_str(s) + " does not match " + shape_str(ref) +
                           " outside axis " + std::to_string(ax));
    }
    out_shape[ax] += s[ax];
  }
  const AxisSplit os = split_at(out_shape, ax);
  std::vector<double> v(shape_numel(out_shape));
  std::vector<std::size_t> offsets;  // per part, start along the axis
  std::size_t at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    const std::size_t plen = p.shape()[ax];
    const auto pv = p.values();
    for (std::size_t o = 0; o < os.outer; ++o) {
      std::copy_n(pv.data() + o * plen * os.inner, plen * os.inner, v.data() + (o * os.len + at) * os.inner);
    }
    at += plen;
  }
  return make_result(out_shape, std::move(v), parts, [os, ax, offsets](Node& out) {
    for (std::size_t k = 0; k < out.parents.size(); ++k) {
      Node& p = *out.parents[k];
      if (!p.requires_grad) continue;
      const std::size_t plen = p.shape[ax];
      auto g = p.grad_buffer();
      for (std::size_t o = 0; o < os.outer; ++o) {
        const double* src = out.grad.data() + (o * os.len + offsets[k]) * os.inner;
        double* dst = g.data() + o * plen * os.inner;
        for (std::size_t i = 0; i < plen * os.inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Tensor concat_last_axis(const std::vector<Tensor>& parts) { return concat(parts, -1); }

Tensor slice(const Tensor& a, std::ptrdiff_t axis, std::size_t start, std::size_t length) {
  const std::size_t ax = norm_axis(axis, a.rank(), a.shape());
  const AxisSplit s = split_at(a.shape(), ax);
  if (start + length > s.len) {
    throw DimensionError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") exceeds extent of shape " + shape_str(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape[ax] = length;
  std::vector<double> v(s.outer * length * s.inner);
  const auto av = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(av.data() + (o * s.len + start) * s.inner, length * s.inner, v.data() + o * length * s.inner);
  }
  return make_result(out_shape, std::move(v), {a}, [s, start, length](Node& out) {
    auto g = out.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < s.outer; ++o) {
      double* dst = g.data() + (o * s.len + start) * s.inner;
      const double* src = out.grad.data() + o * length * s.inner;
      for (std::size_t i = 0; i < length * s.inner; ++i) dst[i] += src[i];
    }
  });
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows) {
  require_same_rank(a, 2, "gather_rows");
  const std::size_t n = a.dim(0), d = a.dim(1);
  std::vector<double> v(rows.size() * d);
  const auto av = a.values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n) throw DimensionError("gather_rows: row " + std::to_string(rows[r]) + " out of range");
    std::copy_n(av.data() + rows[r] * d, d, v.data() + r * d);
  }
  return make_result({rows.size(), d}, std::move(v), {a}, [rows, d](Node& out) {
    auto g = out.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double* dst = g.data() + rows[r] * d;
      const double* src = out.grad.data() + r * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

Tensor linear_layer(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() < 1 || weight.rank() != 2 || x.dim(-1) != weight.dim(0)) {
    throw DimensionError("linear_layer: input " + shape_str(x.shape()) + " does not fit weight " +
                         shape_str(weight.shape()));
  }
  const std::size_t din = weight.dim(0), dout = weight.dim(1);
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != dout)) {
    throw DimensionError("linear_layer: bias " + shape_str(bias.shape()) + " does not fit weight " +
                         shape_str(weight.shape()));
  }
  const std::size_t rows = x.numel() / din;
  Shape out_shape = x.shape();
  out_shape.back() = dout;
  std::vector<double> v(rows * dout, 0.0);
  if (has_bias) {
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(bias.values().data(), dout, v.data() + r * dout);
  }
  gemm_nn(x.values().data(), weight.values().data(), v.data(), rows, din, dout);
  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_result(out_shape, std::move(v), std::move(inputs), [rows, din, dout](Node& out) {
    Node& px = *out.parents[0];
    Node& pw = *out.parents[1];
    if (px.requires_grad) gemm_nt(out.grad.data(), pw.value.data(), px.grad_buffer().data(), rows, dout, din);
    if (pw.requires_grad) gemm_tn(px.value.data(), out.grad.data(), pw.grad_buffer().data(), din, rows, dout);
    if (out.parents.size() > 2 && out.parents[2]->requires_grad) {
      auto gb = out.parents[2]->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < dout; ++j) gb[j] += out.grad[r * dout + j];
      }
    }
  });
}

Tensor dropout(const Tensor& x, double ratio, bool training, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw ConfigError("dropout ratio must lie in [0, 1), got " + std::to_string(ratio));
  }
  if (!training || ratio == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - ratio);
  std::vector<double> mask(x.numel());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double u = util::unit_double(util::mix64(seed + 0x9e3779b97f4a7c15ULL * (i + 1)));
    mask[i] = u < ratio ? 0.0 : keep_scale;
  }
  return mul(x, Tensor::from(x.shape(), std::move(mask)));
}

}  // namespace mmbat::ad
