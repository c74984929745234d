// Copyright 2026 The hmod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense double-precision tensors with a reverse-mode tape.
//
// A Tensor is a cheap handle onto a shared node. Operations on tensors that
// require gradients record a backward closure and their parents; calling
// backward() on a scalar walks that graph once in reverse topological order.
// Shapes are limited to rank 0, 1 and 2, which is all the model needs.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hmod {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until populated by backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return parents.empty(); }
};

struct TensorAccess;

}  // namespace detail

class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor vector(std::span<const double> values,
                       bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values,
                       bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->data.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const { return node_->data; }
  // Direct write access; only meaningful for leaves (parameters, inputs).
  std::span<double> mutable_data() { return node_->data; }

  double item() const;
  double operator[](std::size_t i) const { return node_->data[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  // Same values, no history, no gradient requirement.
  Tensor detach() const;
  std::vector<double> to_vector() const { return node_->data; }

  // Identity of the underlying node (two handles may alias one node).
  const detail::Node* id() const { return node_.get(); }

 private:
  friend struct detail::TensorAccess;

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Populates grad() on every leaf reachable from `loss` that requires
// gradients. Throws if loss is not rank 0, or if a reachable leaf still holds
// a gradient from an earlier call (gradients are never silently accumulated).
void backward(const Tensor& loss);

// --- primitives ---------------------------------------------------------
// All throw hmod::Error(kShape) naming the op and offending shapes.

// [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]; [k]x[k,n] -> [n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // element-wise
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor concat(const std::vector<Tensor>& parts);  // rank-1 parts
Tensor reshape(const Tensor& a, Shape shape);  // same element count
Tensor slice(const Tensor& a, std::size_t begin, std::size_t length);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor softmax(const Tensor& a);  // rank-1
Tensor sum(const Tensor& a);      // -> scalar
Tensor mean(const Tensor& a);     // -> scalar
Tensor dot(const Tensor& a, const Tensor& b);  // rank-1 -> scalar
Tensor stack_rows(const std::vector<Tensor>& rows);  // n x [c] -> [n,c]
Tensor maxpool_rows(const Tensor& a);  // [r,c] -> [c], max over rows

}  // namespace hmod
