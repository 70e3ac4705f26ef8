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

// Text artifacts: strict CSV (locale-free numbers, '.' decimal point, LF
// line ends) and small self-contained SVG plots.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logan/tensor.hpp"
#include "logan/trainer.hpp"

namespace logan {

/// Shortest text that reads back to the same double.
std::string format_real(double v);
std::string format_optional(const std::optional<double>& v);

std::string csv_line(const std::vector<std::string>& cells);

inline constexpr const char* kMetricsHeader =
    "step,L_D,L_G,R_z,dz_norm,df_abs,dtheta_D,dtheta_G,dtheta_diff,curvature_mean,proxy_fid,"
    "mode_coverage,hq_fraction";

std::string metrics_row(const MetricsRecord& r);

/// Strict reader: header required, LF only, every cell empty or a finite
/// number. Throws Error with the line number on violations.
std::vector<std::vector<std::optional<double>>> read_numeric_csv(const std::string& text,
                                                                 const std::string& header);
std::vector<MetricsRecord> read_metrics(const std::string& text);

struct Curve {
  std::string name;
  std::vector<double> x, y;
};

std::string scatter_svg(const Tensor& samples, const std::vector<std::vector<double>>& centers,
                        const std::string& title);
std::string curves_svg(const std::vector<Curve>& curves, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace logan
