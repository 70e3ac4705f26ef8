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

#include "logan/expr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <unordered_set>

#include "logan/errors.hpp"
#include "logan/kernels.hpp"

namespace logan {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

Expression make(Op op, Shape shape, std::vector<Expression> operands,
                double p0 = 0.0, double p1 = 0.0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->shape = std::move(shape);
  n->operands = std::move(operands);
  n->p0 = p0;
  n->p1 = p1;
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return Expression(std::move(n));
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

void require_rank2(const Expression& a, const char* what) {
  require(a.shape().size() == 2, std::string(what) + " needs a rank-2 operand, got " +
                                     shape_string(a.shape()));
}

Shape broadcast_shape(const Expression& a, const Expression& b, Op op) {
  if (a.shape() == b.shape()) return a.shape();
  if (b.is_scalar() && (!a.is_scalar() || a.shape().size() >= b.shape().size()))
    return a.shape();
  if (a.is_scalar()) return b.shape();
  throw ShapeError(std::string(op_name(op)) + ": shape mismatch " +
                   shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

Expression binary(Op op, const Expression& a, const Expression& b) {
  return make(op, broadcast_shape(a, b, op), {a, b});
}

Expression unary(Op op, const Expression& a, double p0 = 0.0, double p1 = 0.0) {
  return make(op, a.shape(), {a}, p0, p1);
}

Expression identifier(Op op, const std::string& name, Shape shape) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->shape = std::move(shape);
  n->name = name;
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return Expression(std::move(n));
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kInput: return "input";
    case Op::kParameter: return "parameter";
    case Op::kConstant: return "constant";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kNeg: return "neg";
    case Op::kSquare: return "square";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kExp: return "exp";
    case Op::kLeakyRelu: return "leaky_relu";
    case Op::kLeakyReluSlope: return "leaky_relu_slope";
    case Op::kClip: return "clip";
    case Op::kClipMask: return "clip_mask";
    case Op::kStopGradient: return "stop_gradient";
    case Op::kMatMul: return "matmul";
    case Op::kTranspose: return "transpose";
    case Op::kSum: return "sum";
    case Op::kRowSum: return "row_sum";
    case Op::kColSum: return "col_sum";
    case Op::kBroadcastRows: return "broadcast_rows";
    case Op::kBroadcastCols: return "broadcast_cols";
    case Op::kFill: return "fill";
    case Op::kReshape: return "reshape";
  }
  return "?";
}

Expression input(const std::string& name, Shape shape) {
  return identifier(Op::kInput, name, std::move(shape));
}

Expression parameter(const std::string& name, Shape shape) {
  return identifier(Op::kParameter, name, std::move(shape));
}

Expression constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConstant;
  n->shape = value.shape();
  n->value = std::move(value);
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return Expression(std::move(n));
}

Expression constant(double value) { return constant(Tensor::scalar(value)); }

Expression operator+(const Expression& a, const Expression& b) { return binary(Op::kAdd, a, b); }
Expression operator-(const Expression& a, const Expression& b) { return binary(Op::kSub, a, b); }
Expression operator*(const Expression& a, const Expression& b) { return binary(Op::kMul, a, b); }
Expression operator/(const Expression& a, const Expression& b) { return binary(Op::kDiv, a, b); }
Expression operator-(const Expression& a) { return unary(Op::kNeg, a); }
Expression operator*(double s, const Expression& a) { return constant(s) * a; }
Expression operator*(const Expression& a, double s) { return a * constant(s); }
Expression operator+(const Expression& a, double s) { return a + constant(s); }
Expression operator+(double s, const Expression& a) { return constant(s) + a; }
Expression operator-(const Expression& a, double s) { return a - constant(s); }
Expression operator-(double s, const Expression& a) { return constant(s) - a; }
Expression operator/(const Expression& a, double s) { return a / constant(s); }
Expression operator/(double s, const Expression& a) { return constant(s) / a; }
Expression square(const Expression& a) { return unary(Op::kSquare, a); }
Expression sin(const Expression& a) { return unary(Op::kSin, a); }
Expression cos(const Expression& a) { return unary(Op::kCos, a); }
Expression exp(const Expression& a) { return unary(Op::kExp, a); }

Expression leaky_relu(const Expression& a, double slope) {
  return unary(Op::kLeakyRelu, a, slope);
}

Expression relu(const Expression& a) { return leaky_relu(a, 0.0); }

Expression clip(const Expression& a, double lo, double hi) {
  if (!(lo < hi)) throw ShapeError("clip: lower bound must be below upper bound");
  return unary(Op::kClip, a, lo, hi);
}

Expression stop_gradient(const Expression& a) { return unary(Op::kStopGradient, a); }

Expression leaky_relu_slope(const Expression& a, double slope) {
  return unary(Op::kLeakyReluSlope, a, slope);
}

Expression clip_mask(const Expression& a, double lo, double hi) {
  return unary(Op::kClipMask, a, lo, hi);
}

Expression matmul(const Expression& a, const Expression& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  require(a.shape()[1] == b.shape()[0],
          "matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
              shape_string(b.shape()));
  return make(Op::kMatMul, {a.shape()[0], b.shape()[1]}, {a, b});
}

Expression transpose(const Expression& a) {
  require_rank2(a, "transpose");
  return make(Op::kTranspose, {a.shape()[1], a.shape()[0]}, {a});
}

Expression sum(const Expression& a) { return make(Op::kSum, {}, {a}); }

Expression mean(const Expression& a) {
  return constant(1.0 / static_cast<double>(a.numel())) * sum(a);
}

Expression row_sum(const Expression& a) {
  require_rank2(a, "row_sum");
  return make(Op::kRowSum, {a.shape()[0], 1}, {a});
}

Expression col_sum(const Expression& a) {
  require_rank2(a, "col_sum");
  return make(Op::kColSum, {1, a.shape()[1]}, {a});
}

Expression broadcast_rows(const Expression& a, std::size_t rows) {
  require_rank2(a, "broadcast_rows");
  require(a.shape()[0] == 1, "broadcast_rows needs a [1 x n] operand, got " +
                                 shape_string(a.shape()));
  return make(Op::kBroadcastRows, {rows, a.shape()[1]}, {a});
}

Expression broadcast_cols(const Expression& a, std::size_t cols) {
  require_rank2(a, "broadcast_cols");
  require(a.shape()[1] == 1, "broadcast_cols needs a [m x 1] operand, got " +
                                 shape_string(a.shape()));
  return make(Op::kBroadcastCols, {a.shape()[0], cols}, {a});
}

Expression fill(const Expression& a, Shape shape) {
  require(a.is_scalar(), "fill needs a one-element operand");
  return make(Op::kFill, std::move(shape), {a});
}

Expression reshape(const Expression& a, Shape shape) {
  require(shape_numel(shape) == a.numel(),
          "reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
  if (shape == a.shape()) return a;
  return make(Op::kReshape, std::move(shape), {a});
}

// ---------------------------------------------------------------------------

void Environment::bind(const std::string& name, Tensor value) {
  bindings_.insert_or_assign(name, std::move(value));
}

bool Environment::contains(const std::string& name) const {
  return bindings_.count(name) != 0;
}

const Tensor& Environment::at(const std::string& name) const {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) throw UnboundIdentifierError(name);
  return it->second;
}

std::vector<const Node*> topological_order(const std::vector<Expression>& roots) {
  std::vector<const Node*> order;
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<const Node*, std::size_t>> stack;
  for (const auto& r : roots) {
    if (!r || !seen.insert(r.get()).second) continue;
    stack.emplace_back(r.get(), 0);
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->operands.size()) {
        const Node* child = node->operands[next++].get();
        if (seen.insert(child).second) stack.emplace_back(child, 0);
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }
  return order;
}

namespace {

// Path of op names from `root` down to `target`, for error reports.
std::string node_path(const Node* root, const Node* target) {
  std::vector<const Node*> path;
  std::unordered_set<const Node*> dead;
  auto dfs = [&](auto&& self, const Node* n) -> bool {
    path.push_back(n);
    if (n == target) return true;
    for (const auto& c : n->operands) {
      if (!dead.count(c.get()) && self(self, c.get())) return true;
    }
    dead.insert(n);
    path.pop_back();
    return false;
  };
  dfs(dfs, root);
  std::string s;
  for (const Node* n : path) {
    if (!s.empty()) s += " > ";
    s += op_name(n->op);
    if (!n->name.empty()) s += "(" + n->name + ")";
    s += "#" + std::to_string(n->id);
  }
  return s;
}

Tensor elementwise(const Node& n, const Tensor& a, const Tensor& b) {
  std::vector<double> out(shape_numel(n.shape));
  switch (n.op) {
    case Op::kAdd: kernels::zip(a.data(), b.data(), out, [](double x, double y) { return x + y; }); break;
    case Op::kSub: kernels::zip(a.data(), b.data(), out, [](double x, double y) { return x - y; }); break;
    case Op::kMul: kernels::zip(a.data(), b.data(), out, [](double x, double y) { return x * y; }); break;
    case Op::kDiv: kernels::zip(a.data(), b.data(), out, [](double x, double y) { return x / y; }); break;
    default: break;
  }
  return Tensor::unchecked(n.shape, std::move(out));
}

template <typename F>
Tensor mapped(const Node& n, const Tensor& a, F f) {
  std::vector<double> out(a.numel());
  kernels::map(a.data(), out, f);
  return Tensor::unchecked(n.shape, std::move(out));
}

}  // namespace

const Tensor& Evaluator::compute(const Node* node, const Expression& root) {
  const Node& n = *node;
  auto arg = [&](std::size_t i) -> const Tensor& { return cache_.at(n.operands[i].get()->id); };
  Tensor out;
  switch (n.op) {
    case Op::kInput:
    case Op::kParameter: {
      const Tensor& bound = env_->at(n.name);
      if (bound.shape() != n.shape) {
        throw ShapeError("identifier '" + n.name + "' declared " + shape_string(n.shape) +
                         " but bound to " + shape_string(bound.shape()));
      }
      out = bound;
      break;
    }
    case Op::kConstant: out = n.value; break;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv: out = elementwise(n, arg(0), arg(1)); break;
    case Op::kNeg: out = mapped(n, arg(0), [](double x) { return -x; }); break;
    case Op::kSquare: out = mapped(n, arg(0), [](double x) { return x * x; }); break;
    case Op::kSin: out = mapped(n, arg(0), [](double x) { return std::sin(x); }); break;
    case Op::kCos: out = mapped(n, arg(0), [](double x) { return std::cos(x); }); break;
    case Op::kExp: out = mapped(n, arg(0), [](double x) { return std::exp(x); }); break;
    case Op::kLeakyRelu: {
      const double s = n.p0;
      out = mapped(n, arg(0), [s](double x) { return x > 0.0 ? x : s * x; });
      break;
    }
    case Op::kLeakyReluSlope: {
      const double s = n.p0;
      out = mapped(n, arg(0), [s](double x) { return x > 0.0 ? 1.0 : s; });
      break;
    }
    case Op::kClip: {
      const double lo = n.p0, hi = n.p1;
      out = mapped(n, arg(0), [lo, hi](double x) { return std::clamp(x, lo, hi); });
      break;
    }
    case Op::kClipMask: {
      const double lo = n.p0, hi = n.p1;
      out = mapped(n, arg(0), [lo, hi](double x) { return (x > lo && x < hi) ? 1.0 : 0.0; });
      break;
    }
    case Op::kStopGradient: out = arg(0); break;
    case Op::kMatMul: {
      const Tensor& a = arg(0);
      const Tensor& b = arg(1);
      std::vector<double> d(shape_numel(n.shape));
      kernels::matmul(a.data(), b.data(), d, a.shape()[0], a.shape()[1], b.shape()[1]);
      out = Tensor::unchecked(n.shape, std::move(d));
      break;
    }
    case Op::kTranspose: {
      const Tensor& a = arg(0);
      std::vector<double> d(a.numel());
      kernels::transpose(a.data(), d, a.shape()[0], a.shape()[1]);
      out = Tensor::unchecked(n.shape, std::move(d));
      break;
    }
    case Op::kSum: {
      double acc = 0.0;
      for (double v : arg(0).data()) acc += v;
      out = Tensor::unchecked({}, {acc});
      break;
    }
    case Op::kRowSum: {
      const Tensor& a = arg(0);
      std::vector<double> d(n.shape[0]);
      kernels::row_sum(a.data(), d, a.shape()[0], a.shape()[1]);
      out = Tensor::unchecked(n.shape, std::move(d));
      break;
    }
    case Op::kColSum: {
      const Tensor& a = arg(0);
      std::vector<double> d(n.shape[1]);
      kernels::col_sum(a.data(), d, a.shape()[0], a.shape()[1]);
      out = Tensor::unchecked(n.shape, std::move(d));
      break;
    }
    case Op::kBroadcastRows: {
      const Tensor& a = arg(0);
      std::vector<double> d;
      d.reserve(shape_numel(n.shape));
      for (std::size_t r = 0; r < n.shape[0]; ++r) d.insert(d.end(), a.values().begin(), a.values().end());
      out = Tensor::unchecked(n.shape, std::move(d));
      break;
    }
    case Op::kBroadcastCols: {
      const Tensor& a = arg(0);
      std::vector<double> d;
      d.reserve(shape_numel(n.shape));
      for (std::size_t r = 0; r < n.shape[0]; ++r) d.insert(d.end(), n.shape[1], a[r]);
      out = Tensor::unchecked(n.shape, std::move(d));
      break;
    }
    case Op::kFill: out = Tensor::unchecked(n.shape, std::vector<double>(shape_numel(n.shape), arg(0)[0])); break;
    case Op::kReshape: out = arg(0).reshaped(n.shape); break;
  }
  if (!out.all_finite()) {
    throw NonFiniteError("non-finite value at " + node_path(root.get(), node));
  }
  return cache_.emplace(node->id, std::move(out)).first->second;
}

const Tensor& Evaluator::value(const Expression& expr) {
  if (auto it = cache_.find(expr.get()->id); it != cache_.end()) return it->second;
  // Walk only the part of the graph not already cached.
  std::vector<const Node*> order;
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<const Node*, std::size_t>> stack{{expr.get(), 0}};
  seen.insert(expr.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->operands.size()) {
      const Node* child = node->operands[next++].get();
      if (!cache_.count(child->id) && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (const Node* n : order) compute(n, expr);
  return cache_.at(expr.get()->id);
}

Tensor evaluate(const Expression& expr, const Environment& env) {
  Evaluator ev(env);
  return ev.value(expr);
}

std::vector<std::string> free_identifiers(const Expression& expr) {
  std::set<std::string> names;
  for (const Node* n : topological_order({expr})) {
    if (n->op == Op::kInput || n->op == Op::kParameter) names.insert(n->name);
  }
  return {names.begin(), names.end()};
}

Expression substitute(const Expression& expr,
                      const std::map<std::string, Expression>& replacements) {
  for (const auto& [name, rep] : replacements) {
    (void)name;
    if (!rep) throw ShapeError("substitute: empty replacement expression");
  }
  const auto order = topological_order({expr});
  // Owning handles for every node, so untouched subgraphs are shared.
  std::unordered_map<const Node*, Expression> handles{{expr.get(), expr}};
  for (const Node* n : order)
    for (const auto& o : n->operands) handles.emplace(o.get(), o);

  std::unordered_map<const Node*, Expression> rebuilt;
  for (const Node* n : order) {
    if (n->op == Op::kInput || n->op == Op::kParameter) {
      auto it = replacements.find(n->name);
      if (it != replacements.end()) {
        if (it->second.shape() != n->shape) {
          throw ShapeError("substitute: '" + n->name + "' has shape " + shape_string(n->shape) +
                           ", replacement has " + shape_string(it->second.shape()));
        }
        rebuilt.emplace(n, it->second);
        continue;
      }
    }
    bool changed = false;
    std::vector<Expression> ops;
    ops.reserve(n->operands.size());
    for (const auto& o : n->operands) {
      const Expression& r = rebuilt.at(o.get());
      changed = changed || r.get() != o.get();
      ops.push_back(r);
    }
    if (!changed) {
      rebuilt.emplace(n, handles.at(n));
      continue;
    }
    auto copy = std::make_shared<Node>(*n);
    copy->operands = std::move(ops);
    copy->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    rebuilt.emplace(n, Expression(std::move(copy)));
  }
  return rebuilt.at(expr.get());
}

}  // namespace logan
