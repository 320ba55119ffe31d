// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sts/error.hpp"

namespace sts {

// Dense n-dimensional array (row-major, contiguous) with reverse-mode
// automatic differentiation. The scalar type is a template parameter so the
// whole graph can run in 64-bit for finite-difference gradient tests while
// production uses 32-bit. Graph construction is single-threaded per model
// instance; ops never broadcast except against scalars.

template <typename S>
struct TensorImpl {
  std::vector<int> shape;
  std::vector<S> data;
  std::vector<S> grad;  // allocated on demand, same extent as data
  bool requires_grad = false;
  // Backward-graph record: parents keep their inputs alive; the closure
  // owns whatever forward state the backward pass needs. Cleared after
  // backward() so memory is released.
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void()> backward_fn;

  std::size_t size() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), S(0));
  }
  void add_grad(std::size_t i, S v) {
    ensure_grad();
    grad[i] += v;
  }
};

inline std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor extents must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

// Thread-local switch: when recording is off, ops compute forward values
// only (inference mode) and the graph stays empty.
inline bool& grad_recording_enabled() {
  thread_local bool enabled = true;
  return enabled;
}

struct NoGradGuard {
  bool saved;
  NoGradGuard() : saved(grad_recording_enabled()) {
    grad_recording_enabled() = false;
  }
  ~NoGradGuard() { grad_recording_enabled() = saved; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <typename S>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl<S>> impl)
      : impl_(std::move(impl)) {}

  static Tensor zeros(std::vector<int> shape) {
    return full(std::move(shape), S(0));
  }
  static Tensor full(std::vector<int> shape, S value) {
    auto impl = std::make_shared<TensorImpl<S>>();
    impl->data.assign(shape_product(shape), value);
    impl->shape = std::move(shape);
    return Tensor(std::move(impl));
  }
  static Tensor from(std::vector<S> data, std::vector<int> shape) {
    if (shape_product(shape) != data.size())
      throw ShapeError("tensor data length does not match shape");
    auto impl = std::make_shared<TensorImpl<S>>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    return Tensor(std::move(impl));
  }
  static Tensor scalar(S value) { return full({1}, value); }
  // Centered uniform in [-bound, bound]; the caller owns the generator so
  // runs with the same seed are bit-identical.
  static Tensor uniform(std::vector<int> shape, S bound, std::mt19937& rng) {
    auto impl = std::make_shared<TensorImpl<S>>();
    impl->data.resize(shape_product(shape));
    impl->shape = std::move(shape);
    std::uniform_real_distribution<double> dist(-static_cast<double>(bound),
                                                static_cast<double>(bound));
    for (auto& v : impl->data) v = static_cast<S>(dist(rng));
    return Tensor(std::move(impl));
  }

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int>& shape() const { return impl_->shape; }
  int dim(int axis) const { return impl_->shape.at(static_cast<std::size_t>(axis)); }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  std::size_t size() const { return impl_->data.size(); }
  std::vector<S>& data() { return impl_->data; }
  const std::vector<S>& data() const { return impl_->data; }
  std::vector<S>& grad() { return impl_->grad; }
  const std::vector<S>& grad() const { return impl_->grad; }
  S item() const {
    if (size() != 1) throw ContractError("item() requires a scalar tensor");
    return impl_->data[0];
  }

  Tensor& set_requires_grad(bool on = true) {
    impl_->requires_grad = on;
    if (on) impl_->ensure_grad();
    return *this;
  }
  bool requires_grad() const { return impl_->requires_grad; }
  void zero_grad() {
    if (!impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), S(0));
  }

  // Same storage under a fresh graph-free handle (for feeding constants).
  Tensor detached() const {
    auto impl = std::make_shared<TensorImpl<S>>();
    impl->shape = impl_->shape;
    impl->data = impl_->data;
    return Tensor(std::move(impl));
  }

  std::shared_ptr<TensorImpl<S>> impl() const { return impl_; }
  TensorImpl<S>* raw() const { return impl_.get(); }

 private:
  std::shared_ptr<TensorImpl<S>> impl_;
};

// Builds the op node for `out` given its parents, when recording is on and
// any parent participates in the graph. The closure must add into parents'
// grad buffers, reading the output gradient from out->grad.
template <typename S>
void record_op(const Tensor<S>& out, std::vector<Tensor<S>> parents,
               std::function<void()> backward_fn) {
  if (!grad_recording_enabled()) return;
  bool needed = false;
  for (const auto& p : parents)
    if (p.impl()->requires_grad || !p.impl()->parents.empty() ||
        p.impl()->backward_fn)
      needed = true;
  if (!needed) return;
  auto* impl = out.raw();
  impl->requires_grad = true;
  impl->parents.reserve(parents.size());
  for (auto& p : parents) impl->parents.push_back(p.impl());
  impl->backward_fn = std::move(backward_fn);
}

// Reverse-mode sweep from a scalar loss. Seeds d(loss)/d(loss) = seed (the
// 1/batch factor of a mean can be folded in here), visits every node once in
// reverse topological order, then frees the graph. Leaf gradients persist
// and accumulate across calls until zero_grad().
template <typename S>
void backward(const Tensor<S>& loss, S seed = S(1)) {
  if (loss.size() != 1)
    throw ContractError("backward: loss must be a scalar tensor");
  std::vector<TensorImpl<S>*> order;
  std::unordered_set<TensorImpl<S>*> seen;
  // Iterative DFS; children are pushed after all parents are explored.
  std::vector<std::pair<TensorImpl<S>*, std::size_t>> stack;
  stack.emplace_back(loss.raw(), 0);
  seen.insert(loss.raw());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl<S>* parent = node->parents[next++].get();
      if (seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.raw()->ensure_grad();
  loss.raw()->grad[0] += seed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl<S>* node = *it;
    if (node->backward_fn) {
      node->ensure_grad();  // closure reads the output gradient
      node->backward_fn();
    }
  }
  for (TensorImpl<S>* node : order) {
    node->backward_fn = nullptr;
    node->parents.clear();
  }
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace sts
