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

#include "logan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "logan/errors.hpp"

namespace logan {

namespace {

bool is_identifier(const Node* n) {
  return n->op == Op::kInput || n->op == Op::kParameter;
}

// Sums `a` down to a broadcast operand's shape.
Expression reduce_to(const Expression& a, const Shape& shape) {
  if (a.shape() == shape) return a;
  return reshape(sum(a), shape);
}

Expression add_all(const std::vector<Expression>& terms) {
  Expression acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = acc + terms[i];
  return acc;
}

// Reverse sweep over `y`; returns the adjoint of every target name that
// occurs in the graph.
std::map<std::string, Expression> reverse_sweep(const Expression& y,
                                                const std::set<std::string>& targets) {
  if (!y.is_scalar()) {
    throw ShapeError("gradient of a non-scalar expression of shape " +
                     shape_string(y.shape()));
  }
  const auto order = topological_order({y});

  std::unordered_map<const Node*, Expression> handles{{y.get(), y}};
  std::unordered_map<const Node*, bool> reaches;
  for (const Node* n : order) {
    for (const auto& o : n->operands) handles.emplace(o.get(), o);
    bool r = false;
    switch (n->op) {
      case Op::kInput:
      case Op::kParameter: r = targets.count(n->name) != 0; break;
      case Op::kConstant:
      case Op::kStopGradient:
      case Op::kLeakyReluSlope:
      case Op::kClipMask: r = false; break;
      default:
        for (const auto& o : n->operands) r = r || reaches.at(o.get());
    }
    reaches.emplace(n, r);
  }

  std::unordered_map<const Node*, std::vector<Expression>> contrib;
  std::map<std::string, std::vector<Expression>> result_terms;
  contrib[y.get()].push_back(constant(Tensor::filled(y.shape(), 1.0)));

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node* n = *it;
    if (!reaches.at(n)) continue;
    auto c = contrib.find(n);
    if (c == contrib.end()) continue;
    const Expression a = add_all(c->second);
    contrib.erase(c);

    if (is_identifier(n)) {
      result_terms[n->name].push_back(a);
      continue;
    }

    auto x = [&](std::size_t i) -> const Expression& { return n->operands[i]; };
    auto push = [&](std::size_t i, const Expression& adj) {
      if (reaches.at(x(i).get())) contrib[x(i).get()].push_back(adj);
    };
    auto wants = [&](std::size_t i) { return reaches.at(x(i).get()); };
    const Expression& self = handles.at(n);

    switch (n->op) {
      case Op::kAdd:
        if (wants(0)) push(0, reduce_to(a, x(0).shape()));
        if (wants(1)) push(1, reduce_to(a, x(1).shape()));
        break;
      case Op::kSub:
        if (wants(0)) push(0, reduce_to(a, x(0).shape()));
        if (wants(1)) push(1, reduce_to(-a, x(1).shape()));
        break;
      case Op::kMul:
        if (wants(0)) push(0, reduce_to(a * x(1), x(0).shape()));
        if (wants(1)) push(1, reduce_to(a * x(0), x(1).shape()));
        break;
      case Op::kDiv:
        if (wants(0)) push(0, reduce_to(a / x(1), x(0).shape()));
        if (wants(1)) push(1, reduce_to(-(a * self) / x(1), x(1).shape()));
        break;
      case Op::kNeg: push(0, -a); break;
      case Op::kSquare: push(0, constant(2.0) * (a * x(0))); break;
      case Op::kSin: push(0, a * cos(x(0))); break;
      case Op::kCos: push(0, -(a * sin(x(0)))); break;
      case Op::kExp: push(0, a * self); break;
      case Op::kLeakyRelu: push(0, a * leaky_relu_slope(x(0), n->p0)); break;
      case Op::kClip: push(0, a * clip_mask(x(0), n->p0, n->p1)); break;
      case Op::kMatMul:
        if (wants(0)) push(0, matmul(a, transpose(x(1))));
        if (wants(1)) push(1, matmul(transpose(x(0)), a));
        break;
      case Op::kTranspose: push(0, transpose(a)); break;
      case Op::kSum: push(0, fill(a, x(0).shape())); break;
      case Op::kRowSum: push(0, broadcast_cols(a, x(0).shape()[1])); break;
      case Op::kColSum: push(0, broadcast_rows(a, x(0).shape()[0])); break;
      case Op::kBroadcastRows: push(0, col_sum(a)); break;
      case Op::kBroadcastCols: push(0, row_sum(a)); break;
      case Op::kFill: push(0, reshape(sum(a), x(0).shape())); break;
      case Op::kReshape: push(0, reshape(a, x(0).shape())); break;
      case Op::kInput:
      case Op::kParameter:
      case Op::kConstant:
      case Op::kStopGradient:
      case Op::kLeakyReluSlope:
      case Op::kClipMask: break;
    }
  }

  std::map<std::string, Expression> out;
  for (auto& [name, terms] : result_terms) out.emplace(name, add_all(terms));
  return out;
}

}  // namespace

std::vector<Expression> gradient_exprs(const Expression& expr,
                                       const std::vector<std::string>& vars) {
  const auto adj = reverse_sweep(expr, {vars.begin(), vars.end()});
  std::vector<Expression> out;
  out.reserve(vars.size());
  for (const auto& v : vars) {
    auto it = adj.find(v);
    if (it == adj.end()) {
      const auto ids = free_identifiers(expr);
      if (std::find(ids.begin(), ids.end(), v) == ids.end()) throw UnboundIdentifierError(v);
      // Present but only behind stop_gradient or a mask: zero derivative.
      for (const Node* n : topological_order({expr})) {
        if (is_identifier(n) && n->name == v) {
          out.push_back(constant(Tensor::zeros(n->shape)));
          break;
        }
      }
      continue;
    }
    out.push_back(it->second);
  }
  return out;
}

std::vector<Expression> gradient_exprs(const Expression& expr,
                                       const std::vector<Expression>& vars) {
  std::set<std::string> names;
  for (const auto& v : vars) {
    if (!v.is_identifier()) throw Error("gradient_exprs: var is not an identifier");
    names.insert(v.node().name);
  }
  const auto adj = reverse_sweep(expr, names);
  std::vector<Expression> out;
  out.reserve(vars.size());
  for (const auto& v : vars) {
    auto it = adj.find(v.node().name);
    out.push_back(it == adj.end() ? constant(Tensor::zeros(v.shape())) : it->second);
  }
  return out;
}

Expression gradient_expr(const Expression& expr, const std::string& var) {
  return gradient_exprs(expr, std::vector<std::string>{var}).front();
}

std::vector<Tensor> gradient(const Expression& expr,
                             const std::vector<std::string>& vars,
                             const Environment& env) {
  const auto adj = reverse_sweep(expr, {vars.begin(), vars.end()});
  Evaluator ev(env);
  std::vector<Tensor> out;
  out.reserve(vars.size());
  for (const auto& v : vars) {
    auto it = adj.find(v);
    if (it == adj.end()) {
      out.push_back(Tensor::zeros(env.at(v).shape()));
    } else {
      out.push_back(ev.value(it->second));
    }
  }
  return out;
}

Tensor finite_difference(const ScalarFn& fn, const Tensor& point, double eps) {
  if (!(eps > 0.0)) throw Error("finite_difference: eps must be positive");
  std::vector<double> g(point.numel());
  Tensor probe = point;
  for (std::size_t i = 0; i < point.numel(); ++i) {
    const double x = point[i];
    probe[i] = x + eps;
    const double fp = fn(probe);
    probe[i] = x - eps;
    const double fm = fn(probe);
    probe[i] = x;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NonFiniteError("finite_difference: non-finite function value at coordinate " +
                           std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * eps);
  }
  return Tensor(point.shape(), std::move(g));
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw ShapeError("relative_error: length mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  return diff / std::max(max_abs(b), floor);
}

}  // namespace logan
