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

// Reverse-mode differentiation by graph transformation.
//
// `gradient_exprs` runs the reverse sweep symbolically: adjoints are built
// as ordinary Expressions that reference the forward nodes. The result can
// be evaluated, composed and differentiated again, which is how gradients
// through an inner gradient step (second-order terms) are obtained.
//
// Conventions:
//  - stop_gradient contributes nothing to any derivative.
//  - clip has derivative 1 strictly inside (lo, hi) and 0 elsewhere,
//    including exactly at the bounds.
//  - leaky_relu has derivative `slope` at 0.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logan/expr.hpp"

namespace logan {

/// Expressions for d(expr)/d(var) for every var, from one shared sweep.
/// `expr` must have one element. Throws UnboundIdentifierError for a var
/// that does not occur in `expr`.
std::vector<Expression> gradient_exprs(const Expression& expr,
                                       const std::vector<std::string>& vars);

/// As above, keyed by identifier leaves; a var absent from `expr` yields a
/// zero constant of the identifier's declared shape.
std::vector<Expression> gradient_exprs(const Expression& expr,
                                       const std::vector<Expression>& vars);

Expression gradient_expr(const Expression& expr, const std::string& var);

/// Numeric gradients of a scalar expression, one tensor per var.
std::vector<Tensor> gradient(const Expression& expr,
                             const std::vector<std::string>& vars,
                             const Environment& env);

using ScalarFn = std::function<double(const Tensor&)>;

/// Central differences (fn(x + eps e_i) - fn(x - eps e_i)) / (2 eps).
Tensor finite_difference(const ScalarFn& fn, const Tensor& point, double eps);

/// Norm-wise relative error max|a - b| / max(max|b|, floor).
double relative_error(std::span<const double> a, std::span<const double> b,
                      double floor = 1e-12);

}  // namespace logan
