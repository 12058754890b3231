#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fieldcast/core/tensor.hpp"

namespace fieldcast::nn {

inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}

inline bool grad_enabled() { return grad_enabled_flag(); }

// Disables graph recording in scope; forward passes run value-only.
struct NoGradGuard {
  NoGradGuard() : prev_(grad_enabled_flag()) { grad_enabled_flag() = false; }
  ~NoGradGuard() { grad_enabled_flag() = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

template <class T>
struct Node {
  Tensor<T> value;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Maps upstream gradient to per-parent gradients (aligned with `parents`;
  // entries for parents without requires_grad may be left empty).
  std::function<std::vector<Tensor<T>>(const Tensor<T>&)> backward;
};

template <class T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> n) : node_(std::move(n)) {}

  static Var constant(Tensor<T> v) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    return Var(std::move(n));
  }

  static Var param(Tensor<T> v) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    n->requires_grad = true;
    return Var(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& value() { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Builds an op node. Records the graph edge only when grad is enabled and
// some parent participates in differentiation.
template <class T>
Var<T> make_op(Tensor<T> value, std::vector<std::shared_ptr<Node<T>>> parents,
               std::function<std::vector<Tensor<T>>(const Tensor<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  bool rg = false;
  if (grad_enabled()) {
    for (const auto& p : parents)
      if (p && p->requires_grad) rg = true;
  }
  if (rg) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Var<T>(std::move(n));
}

template <class T>
using GradMap = std::unordered_map<const Node<T>*, Tensor<T>>;

// Reverse-mode sweep from `root`. Returns gradients for every reachable leaf
// with requires_grad; intermediate gradients are freed as soon as consumed.
// Deterministic: topological order depends only on graph structure.
template <class T>
GradMap<T> backward(const Var<T>& root, Tensor<T> seed = Tensor<T>()) {
  require(root.defined(), "backward: undefined root");
  if (!seed.defined() || seed.numel() == 0)
    seed = Tensor<T>::full(root.value().shape(), T(1));
  require(same_shape(seed, root.value()), "backward: seed shape mismatch");

  // Post-order DFS over requires_grad subgraph.
  std::vector<Node<T>*> order;
  std::unordered_set<const Node<T>*> seen;
  struct Frame {
    Node<T>* n;
    size_t next;
  };
  std::vector<Frame> stack;
  if (root.node()->requires_grad) {
    stack.push_back({root.node().get(), 0});
    seen.insert(root.node().get());
  }
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      Node<T>* p = f.n->parents[f.next++].get();
      if (p && p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  GradMap<T> grads;
  grads[root.node().get()] = std::move(seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    auto gi = grads.find(n);
    if (gi == grads.end()) continue;
    if (!n->backward) continue;  // leaf
    std::vector<Tensor<T>> parts = n->backward(gi->second);
    require(parts.size() == n->parents.size(), "backward: op returned wrong grad count");
    for (size_t i = 0; i < parts.size(); ++i) {
      const auto& p = n->parents[i];
      if (!p || !p->requires_grad || !parts[i].defined() || parts[i].numel() == 0) continue;
      auto slot = grads.find(p.get());
      if (slot == grads.end())
        grads.emplace(p.get(), std::move(parts[i]));
      else
        slot->second.add_(parts[i]);
    }
    grads.erase(gi);  // interior grad no longer needed
  }
  return grads;
}

}  // namespace fieldcast::nn
