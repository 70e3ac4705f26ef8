// Copyright 2026 The LOGAN Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Immutable expression graphs over dense tensors.
//
// An Expression is a cheap handle to a shared, immutable node. Shapes are
// inferred when a node is built, so most shape errors surface at
// construction; identifier shapes are checked again against the bound
// tensors at evaluation. Only scalar-with-tensor broadcasting is implicit;
// row and column broadcasts are explicit ops.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "logan/tensor.hpp"

namespace logan {

enum class Op : std::uint8_t {
  kInput,
  kParameter,
  kConstant,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSquare,
  kSin,
  kCos,
  kExp,
  kLeakyRelu,
  kLeakyReluSlope,  // derivative mask of leaky_relu: 1 or slope
  kClip,
  kClipMask,  // derivative mask of clip: 1 strictly inside, else 0
  kStopGradient,
  kMatMul,
  kTranspose,
  kSum,
  kRowSum,
  kColSum,
  kBroadcastRows,
  kBroadcastCols,
  kFill,
  kReshape,
};

const char* op_name(Op op);

class Expression;

struct Node {
  Op op;
  Shape shape;
  std::vector<Expression> operands;
  std::string name;  // identifiers only
  Tensor value;      // constants only
  double p0 = 0.0;   // slope, or clip lower bound
  double p1 = 0.0;   // clip upper bound
  std::uint64_t id = 0;
};

class Expression {
 public:
  Expression() = default;
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const { return *node_; }
  const Node* get() const { return node_.get(); }
  explicit operator bool() const { return static_cast<bool>(node_); }

  Op op() const { return node_->op; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return shape_numel(node_->shape); }
  bool is_scalar() const { return numel() == 1; }
  bool is_identifier() const {
    return op() == Op::kInput || op() == Op::kParameter;
  }

 private:
  std::shared_ptr<const Node> node_;
};

// Leaves.
Expression input(const std::string& name, Shape shape);
Expression parameter(const std::string& name, Shape shape);
Expression constant(Tensor value);
Expression constant(double value);

// Elementwise; one operand may be a one-element tensor.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression operator*(double s, const Expression& a);
Expression operator*(const Expression& a, double s);
Expression operator+(const Expression& a, double s);
Expression operator+(double s, const Expression& a);
Expression operator-(const Expression& a, double s);
Expression operator-(double s, const Expression& a);
Expression operator/(const Expression& a, double s);
Expression operator/(double s, const Expression& a);
Expression square(const Expression& a);
Expression sin(const Expression& a);
Expression cos(const Expression& a);
Expression exp(const Expression& a);
Expression leaky_relu(const Expression& a, double slope);
Expression relu(const Expression& a);
Expression clip(const Expression& a, double lo, double hi);
Expression stop_gradient(const Expression& a);
/// Derivative masks used by the reverse sweep. Their own derivative is zero.
Expression leaky_relu_slope(const Expression& a, double slope);
Expression clip_mask(const Expression& a, double lo, double hi);

// Linear algebra and reductions on rank-2 operands.
Expression matmul(const Expression& a, const Expression& b);
Expression transpose(const Expression& a);
/// Sum of all entries, rank 0.
Expression sum(const Expression& a);
Expression mean(const Expression& a);
/// [m x n] -> [m x 1]
Expression row_sum(const Expression& a);
/// [m x n] -> [1 x n]
Expression col_sum(const Expression& a);
/// [1 x n] -> [rows x n]
Expression broadcast_rows(const Expression& a, std::size_t rows);
/// [m x 1] -> [m x cols]
Expression broadcast_cols(const Expression& a, std::size_t cols);
/// One-element `a` repeated to `shape`.
Expression fill(const Expression& a, Shape shape);
Expression reshape(const Expression& a, Shape shape);

/// Bindings from identifier names to tensors.
class Environment {
 public:
  Environment() = default;
  Environment(std::initializer_list<std::pair<const std::string, Tensor>> init)
      : bindings_(init) {}

  void bind(const std::string& name, Tensor value);
  bool contains(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  const std::map<std::string, Tensor>& bindings() const { return bindings_; }

 private:
  std::map<std::string, Tensor> bindings_;
};

/// Forward evaluator. Values are cached per instance, so several
/// expressions sharing subgraphs can be evaluated against one cache.
class Evaluator {
 public:
  explicit Evaluator(const Environment& env) : env_(&env) {}

  const Tensor& value(const Expression& expr);

 private:
  const Tensor& compute(const Node* node, const Expression& root);

  const Environment* env_;
  // Keyed by node id, not address: addresses of freed nodes get reused.
  std::unordered_map<std::uint64_t, Tensor> cache_;
};

Tensor evaluate(const Expression& expr, const Environment& env);

/// Nodes reachable from `roots` in an order where operands precede users.
std::vector<const Node*> topological_order(const std::vector<Expression>& roots);

/// Names of every identifier reachable from `expr`.
std::vector<std::string> free_identifiers(const Expression& expr);

/// Rebuilds `expr` with identifiers replaced by the mapped expressions.
/// Replacement shapes must match the identifiers they replace.
Expression substitute(const Expression& expr,
                      const std::map<std::string, Expression>& replacements);

}  // namespace logan
