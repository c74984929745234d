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

#include "hmod/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "hmod/error.hpp"

namespace hmod {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

thread_local bool g_grad_enabled = true;

[[noreturn]] void shape_error(const char* op, const Shape& a) {
  throw Error(ErrorKind::kShape,
              std::string(op) + ": unsupported shape " + shape_string(a));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw Error(ErrorKind::kShape, std::string(op) + ": incompatible shapes " +
                                     shape_string(a) + " and " +
                                     shape_string(b));
}

// Grad buffer of a parent, or nullptr when the parent takes no gradient.
double* grad_of(detail::Node& self, std::size_t parent) {
  auto& p = *self.parents[parent];
  return p.requires_grad ? p.grad.data() : nullptr;
}

const std::vector<double>& data_of(detail::Node& self, std::size_t parent) {
  return self.parents[parent]->data;
}

}  // namespace

namespace detail {

struct TensorAccess {
  static Tensor make(Shape shape, std::vector<double> data,
                     const std::vector<Tensor>& inputs,
                     std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    if (g_grad_enabled) {
      bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
        return t.node_->requires_grad;
      });
      if (any) {
        node->requires_grad = true;
        node->parents.reserve(inputs.size());
        for (const auto& t : inputs) node->parents.push_back(t.node_);
        node->backward = std::move(backward_fn);
      }
    }
    return Tensor(std::move(node));
  }

  static const std::shared_ptr<Node>& node(const Tensor& t) { return t.node_; }
};

}  // namespace detail

using detail::TensorAccess;

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor() : node_(std::make_shared<detail::Node>()) {}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  if (shape.size() > 2 || shape_size(shape) != values.size()) {
    throw Error(ErrorKind::kShape, "tensor: shape " + shape_string(shape) +
                                       " does not hold " +
                                       std::to_string(values.size()) +
                                       " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::vector(std::span<const double> values, bool requires_grad) {
  return from({values.size()}, {values.begin(), values.end()}, requires_grad);
}

Tensor Tensor::vector(std::initializer_list<double> values,
                      bool requires_grad) {
  return from({values.size()}, std::vector<double>(values), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) shape_error("dim", shape());
  return node_->shape[axis];
}

double Tensor::item() const {
  if (size() != 1) shape_error("item", shape());
  return node_->data[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) shape_error("at", shape());
  return node_->data[row * node_->shape[1] + col];
}

Tensor Tensor::detach() const {
  return from(node_->shape, node_->data, false);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

void backward(const Tensor& loss) {
  if (loss.rank() != 0) {
    throw Error(ErrorKind::kShape,
                "backward: loss must be a scalar, got " +
                    shape_string(loss.shape()));
  }
  const auto& root = TensorAccess::node(loss);
  if (!root->requires_grad) return;

  // Iterative post-order DFS; `order` ends up parents-before-children.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    if (node->is_leaf() && !node->grad.empty()) {
      throw Error(ErrorKind::kState,
                  "backward: a parameter already holds a gradient; reset it "
                  "(optimizer step or zero_grad) before another backward");
    }
  }
  for (auto* node : order) node->grad.assign(node->data.size(), 0.0);
  root->grad[0] = 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
  for (auto* node : order) {
    if (!node->is_leaf()) {
      node->grad.clear();
      node->grad.shrink_to_fit();
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() == 2 && b.rank() == 2) {
    const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) shape_error("matmul", a.shape(), b.shape());
    std::vector<double> out(m * n);
    MatMap(out.data(), m, n).noalias() =
        ConstMatMap(a.data().data(), m, k) * ConstMatMap(b.data().data(), k, n);
    return TensorAccess::make({m, n}, std::move(out), {a, b},
                              [m, k, n](detail::Node& self) {
      ConstMatMap g(self.grad.data(), m, n);
      if (double* ga = grad_of(self, 0)) {
        MatMap(ga, m, k).noalias() +=
            g * ConstMatMap(data_of(self, 1).data(), k, n).transpose();
      }
      if (double* gb = grad_of(self, 1)) {
        MatMap(gb, k, n).noalias() +=
            ConstMatMap(data_of(self, 0).data(), m, k).transpose() * g;
      }
    });
  }
  if (a.rank() == 2 && b.rank() == 1) {
    const auto m = a.dim(0), k = a.dim(1);
    if (b.dim(0) != k) shape_error("matmul", a.shape(), b.shape());
    std::vector<double> out(m);
    VecMap(out.data(), m).noalias() =
        ConstMatMap(a.data().data(), m, k) * ConstVecMap(b.data().data(), k);
    return TensorAccess::make({m}, std::move(out), {a, b},
                              [m, k](detail::Node& self) {
      ConstVecMap g(self.grad.data(), m);
      if (double* ga = grad_of(self, 0)) {
        MatMap(ga, m, k).noalias() +=
            g * ConstVecMap(data_of(self, 1).data(), k).transpose();
      }
      if (double* gb = grad_of(self, 1)) {
        VecMap(gb, k).noalias() +=
            ConstMatMap(data_of(self, 0).data(), m, k).transpose() * g;
      }
    });
  }
  if (a.rank() == 1 && b.rank() == 2) {
    const auto k = a.dim(0), n = b.dim(1);
    if (b.dim(0) != k) shape_error("matmul", a.shape(), b.shape());
    std::vector<double> out(n);
    VecMap(out.data(), n).noalias() =
        ConstMatMap(b.data().data(), k, n).transpose() *
        ConstVecMap(a.data().data(), k);
    return TensorAccess::make({n}, std::move(out), {a, b},
                              [k, n](detail::Node& self) {
      ConstVecMap g(self.grad.data(), n);
      if (double* ga = grad_of(self, 0)) {
        VecMap(ga, k).noalias() +=
            ConstMatMap(data_of(self, 1).data(), k, n) * g;
      }
      if (double* gb = grad_of(self, 1)) {
        MatMap(gb, k, n).noalias() +=
            ConstVecMap(data_of(self, 0).data(), k) * g.transpose();
      }
    });
  }
  shape_error("matmul", a.shape(), b.shape());
}

namespace {

template <class Forward, class Backward>
Tensor binary_elementwise(const char* name, const Tensor& a, const Tensor& b,
                          Forward f, Backward df) {
  if (a.shape() != b.shape()) shape_error(name, a.shape(), b.shape());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i], b[i]);
  return TensorAccess::make(a.shape(), std::move(out), {a, b},
                            [df](detail::Node& self) {
    const auto& x = data_of(self, 0);
    const auto& y = data_of(self, 1);
    double* gx = grad_of(self, 0);
    double* gy = grad_of(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      auto [dx, dy] = df(x[i], y[i]);
      if (gx) gx[i] += self.grad[i] * dx;
      if (gy) gy[i] += self.grad[i] * dy;
    }
  });
}

// f maps input -> output; df maps (input, output) -> local derivative.
template <class Forward, class Derivative>
Tensor unary_elementwise(const Tensor& a, Forward f, Derivative df) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i]);
  return TensorAccess::make(a.shape(), std::move(out), {a},
                            [df](detail::Node& self) {
    const auto& x = data_of(self, 0);
    double* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      gx[i] += self.grad[i] * df(x[i], self.data[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return std::pair{1.0, 1.0}; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return std::pair{1.0, -1.0}; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double x, double y) { return std::pair{y, x}; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary_elementwise(
      a, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary_elementwise(
      a, [value](double x) { return x + value; },
      [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_elementwise(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor concat(const std::vector<Tensor>& parts) {
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != 1) shape_error("concat", p.shape());
    total += p.size();
  }
  std::vector<double> out;
  out.reserve(total);
  std::vector<std::size_t> offsets;
  offsets.reserve(parts.size());
  for (const auto& p : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return TensorAccess::make({total}, std::move(out), parts,
                            [offsets](detail::Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      double* g = grad_of(self, i);
      if (!g) continue;
      const auto n = self.parents[i]->data.size();
      for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[offsets[i] + j];
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape.size() > 2 || shape_size(shape) != a.size()) {
    shape_error("reshape", a.shape(), shape);
  }
  return TensorAccess::make(std::move(shape), a.to_vector(), {a},
                            [](detail::Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor slice(const Tensor& a, std::size_t begin, std::size_t length) {
  if (a.rank() != 1 || begin + length > a.size()) {
    throw Error(ErrorKind::kShape,
                "slice: range [" + std::to_string(begin) + "," +
                    std::to_string(begin + length) + ") out of " +
                    shape_string(a.shape()));
  }
  std::vector<double> out(a.data().begin() + begin,
                          a.data().begin() + begin + length);
  return TensorAccess::make({length}, std::move(out), {a},
                            [begin](detail::Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t j = 0; j < self.grad.size(); ++j) {
        g[begin + j] += self.grad[j];
      }
    }
  });
}

Tensor softmax(const Tensor& a) {
  if (a.rank() != 1 || a.size() == 0) shape_error("softmax", a.shape());
  const double peak = *std::max_element(a.data().begin(), a.data().end());
  std::vector<double> out(a.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(a[i] - peak);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return TensorAccess::make(a.shape(), std::move(out), {a},
                            [](detail::Node& self) {
    double* g = grad_of(self, 0);
    if (!g) return;
    double inner = 0.0;
    for (std::size_t i = 0; i < self.data.size(); ++i) {
      inner += self.grad[i] * self.data[i];
    }
    for (std::size_t i = 0; i < self.data.size(); ++i) {
      g[i] += self.data[i] * (self.grad[i] - inner);
    }
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return TensorAccess::make({}, {total}, {a}, [](detail::Node& self) {
    if (double* g = grad_of(self, 0)) {
      const auto n = self.parents[0]->data.size();
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) shape_error("mean", a.shape());
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor dot(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || a.shape() != b.shape()) {
    shape_error("dot", a.shape(), b.shape());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return TensorAccess::make({}, {total}, {a, b}, [](detail::Node& self) {
    const auto& x = data_of(self, 0);
    const auto& y = data_of(self, 1);
    const double g = self.grad[0];
    if (double* gx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g * y[i];
    }
    if (double* gy = grad_of(self, 1)) {
      for (std::size_t i = 0; i < y.size(); ++i) gy[i] += g * x[i];
    }
  });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) shape_error("stack_rows", Shape{0});
  const auto cols = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.rank() != 1 || r.size() != cols) {
      shape_error("stack_rows", rows.front().shape(), r.shape());
    }
    out.insert(out.end(), r.data().begin(), r.data().end());
  }
  return TensorAccess::make({rows.size(), cols}, std::move(out), rows,
                            [cols](detail::Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (double* g = grad_of(self, i)) {
        for (std::size_t j = 0; j < cols; ++j) g[j] += self.grad[i * cols + j];
      }
    }
  });
}

Tensor maxpool_rows(const Tensor& a) {
  if (a.rank() != 2 || a.dim(0) == 0) shape_error("maxpool_rows", a.shape());
  const auto rows = a.dim(0), cols = a.dim(1);
  std::vector<double> out(cols);
  std::vector<std::size_t> winner(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    double best = a[c];
    for (std::size_t r = 1; r < rows; ++r) {
      if (a[r * cols + c] > best) {
        best = a[r * cols + c];
        winner[c] = r;
      }
    }
    out[c] = best;
  }
  return TensorAccess::make({cols}, std::move(out), {a},
                            [winner, cols](detail::Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t c = 0; c < cols; ++c) {
        g[winner[c] * cols + c] += self.grad[c];
      }
    }
  });
}

}  // namespace hmod
