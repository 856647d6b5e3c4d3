#include "mmbat/autodiff/tensor.hpp"

#include <atomic>
#include <unordered_set>

#include "mmbat/errors.hpp"

namespace mmbat::ad {

namespace {

std::uint64_t next_node_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor of shape " + shape_str(shape) + " given " +
                         std::to_string(values.size()) + " values");
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  n->id = next_node_id();
  return n;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(shape_numel(shape), value);
  return Tensor(new_node(std::move(shape), std::move(v), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

std::size_t Tensor::dim(std::ptrdiff_t axis) const {
  const auto r = static_cast<std::ptrdiff_t>(rank());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw DimensionError("axis out of range for shape " + shape_str(shape()));
  return node_->shape[static_cast<std::size_t>(axis)];
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward_fn) {
  bool track = false;
  for (const auto& t : inputs) track = track || t.requires_grad();
  auto n = new_node(std::move(shape), std::move(values), track);
  if (track) {
    n->parents.reserve(inputs.size());
    for (auto& t : inputs) n->parents.push_back(t.node());
    n->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(n));
}

Graph Graph::collect(const Tensor& root) {
  Graph g;
  if (!root.requires_grad()) return g;
  std::unordered_set<const Node*> seen;
  // Iterative post-order DFS; a node is emitted after all of its parents.
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const auto& p = node->parents[next++];
      if (p->requires_grad && seen.insert(p.get()).second) stack.emplace_back(p, 0);
    } else {
      g.order_.push_back(node);
      stack.pop_back();
    }
  }
  return g;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward() requires a scalar loss, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;
  Graph g = Graph::collect(loss);
  loss.node()->accumulate(0, 1.0);
  auto order = g.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& n = **it;
    if (n.backward_fn && !n.grad.empty()) n.backward_fn(n);
  }
  for (const auto& n : order) {
    if (n->backward_fn) {
      n->backward_fn = nullptr;
      n->parents.clear();
      // Interior gradients are transient; only leaves keep theirs.
      if (n.get() != loss.node().get()) n->grad.clear();
    }
  }
}

}  // namespace mmbat::ad
