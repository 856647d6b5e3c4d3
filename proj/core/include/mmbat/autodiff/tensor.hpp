#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mmbat::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// One value in a define-by-run computation graph. Interior nodes keep their
/// parents alive until backward() has consumed them.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  void accumulate(std::size_t i, double g) {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    grad[i] += g;
  }
  std::span<double> grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

/// Shared handle to a graph node holding a row-major float64 array.
///
/// Copies alias the same node. Values are treated as immutable once the
/// tensor has been used as an operation input; only leaf parameters are
/// mutated in place (by the optimizer or initializers).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::ptrdiff_t axis) const;
  std::size_t numel() const { return node_->value.size(); }

  std::span<const double> values() const { return node_->value; }
  /// In-place access for leaves (initialization, optimizer updates).
  std::span<double> mutable_values() { return node_->value; }
  double item() const;
  double at(std::size_t flat_index) const { return node_->value[flat_index]; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.clear(); }

  std::uint64_t node_id() const { return node_->id; }
  /// Same values, cut from the graph, no gradient tracking.
  Tensor detach() const;

  const std::shared_ptr<Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<Node> node_;
};

/// Creates the result node of an operation. The node only records parents and
/// a backward closure when at least one input requires a gradient, so
/// constant-only computations build no graph at all.
Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward_fn);

/// Nodes reachable from a root in topological order (inputs before users).
class Graph {
 public:
  static Graph collect(const Tensor& root);

  std::span<const std::shared_ptr<Node>> order() const { return order_; }
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<std::shared_ptr<Node>> order_;
};

/// Reverse sweep from a scalar loss. Gradients accumulate (+=) into every
/// requires_grad node, so fan-out sums branch contributions. Afterwards the
/// interior edges are released: the graph is single-use, leaves keep grads.
void backward(const Tensor& loss);

}  // namespace mmbat::ad
