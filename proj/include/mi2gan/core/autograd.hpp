#ifndef MI2GAN_CORE_AUTOGRAD_HPP
#define MI2GAN_CORE_AUTOGRAD_HPP

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "mi2gan/core/tensor.hpp"

namespace mi2gan {

// Reverse-mode autodiff over a dynamically built DAG. Each op allocates a
// node holding its output value; backward_fn reads the node's grad and
// accumulates into the parents' grads. Graph construction is skipped when
// grads are globally disabled or no parent requires them, so frozen
// subgraphs cost nothing at backward time.

inline int& no_grad_depth() {
  thread_local int depth = 0;
  return depth;
}

inline bool grad_enabled() { return no_grad_depth() == 0; }

struct NoGradGuard {
  NoGradGuard() { ++no_grad_depth(); }
  ~NoGradGuard() { --no_grad_depth(); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backward_fn;

  Tensor<T>& ensure_grad() {
    if (grad.numel() != value.numel()) grad = Tensor<T>(value.shape());
    return grad;
  }

  void zero_grad() {
    if (grad.numel() == value.numel()) grad.fill(T(0));
  }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

template <typename T>
Var<T> make_constant(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = false;
  return n;
}

template <typename T>
Var<T> make_parameter(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

// Op result node. Drops graph edges when grads are disabled or nothing
// upstream requires them.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> backward_fn) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  bool track = grad_enabled();
  if (track) {
    track = false;
    for (const auto& p : parents) {
      if (p && p->requires_grad) {
        track = true;
        break;
      }
    }
  }
  if (track) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

// Leaf that shares the value but severs the graph.
template <typename T>
Var<T> detach(const Var<T>& v) {
  return make_constant(v->value);
}

// Backpropagates from a scalar root. Reverse DFS post-order gives a valid
// topological order, so each node's grad is complete before its backward_fn
// runs (shared subgraphs accumulate).
template <typename T>
void backward(const Var<T>& root) {
  check(root->value.numel() == 1, "backward: root must be scalar, got shape " +
                                      shape_str(root->value.shape()));
  if (!root->requires_grad) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<T>* p = node->parents[idx].get();
      ++idx;
      if (p && p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad.fill(T(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward_fn) node->backward_fn(*node);
  }
}

}  // namespace mi2gan

#endif
