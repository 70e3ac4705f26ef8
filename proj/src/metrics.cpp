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

#include "logan/metrics.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "logan/errors.hpp"
#include "logan/rng.hpp"

namespace logan {

namespace {

Eigen::MatrixXd to_eigen(const Tensor& t) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.at(i, j);
  }
  return m;
}

void check_summary(const GaussianSummary& s) {
  const std::size_t d = s.dim();
  if (s.cov.rank() != 2 || s.cov.rows() != d || s.cov.cols() != d) {
    throw ShapeError("GaussianSummary: covariance must be d x d");
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(s.cov.at(i, j) - s.cov.at(j, i)) > 1e-12) {
        throw Error("GaussianSummary: covariance is not symmetric");
      }
    }
  }
}

// Eigenvalues of a symmetric matrix with the PSD tolerance applied.
Eigen::VectorXd clamped_eigenvalues(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es,
                                    const char* what) {
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -kPsdTolerance) throw Error(std::string(what) + " is not positive semi-definite");
    ev[i] = std::max(ev[i], 0.0);
  }
  return ev;
}

Tensor draw_latents(const GanModel& model, const EvalSettings& settings) {
  Rng rng(settings.seed);
  return sample_latents(rng, settings.samples, model.latent_dim());
}

}  // namespace

GaussianSummary GaussianSummary::fit(const Tensor& samples) {
  if (samples.rank() != 2 || samples.rows() < 2) throw ShapeError("fit: need an [n x d] matrix with n >= 2");
  const std::size_t n = samples.rows(), d = samples.cols();
  GaussianSummary s;
  s.count = n;
  s.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += samples.at(r, j);
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = samples.at(r, i) - s.mean[i];
      for (std::size_t j = 0; j <= i; ++j) cov[i * d + j] += di * (samples.at(r, j) - s.mean[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cov[i * d + j] /= static_cast<double>(n - 1);
      cov[j * d + i] = cov[i * d + j];
    }
  }
  s.cov = Tensor({d, d}, std::move(cov));
  return s;
}

double gaussian_frechet(const GaussianSummary& p, const GaussianSummary& q) {
  if (p.dim() != q.dim()) throw ShapeError("gaussian_frechet: dimension mismatch");
  check_summary(p);
  check_summary(q);
  const Eigen::MatrixXd sp = to_eigen(p.cov), sq = to_eigen(q.cov);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(sp);
  const Eigen::VectorXd lp = clamped_eigenvalues(ep, "covariance p");
  clamped_eigenvalues(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sq), "covariance q");
  const Eigen::MatrixXd root_p = ep.eigenvectors() * lp.cwiseSqrt().asDiagonal() * ep.eigenvectors().transpose();
  Eigen::MatrixXd m = root_p * sq * root_p;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lm = clamped_eigenvalues(em, "covariance product");

  double mean_term = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double d = p.mean[i] - q.mean[i];
    mean_term += d * d;
  }
  const double trace = sp.trace() + sq.trace() - 2.0 * lm.cwiseSqrt().sum();
  return std::max(0.0, mean_term + trace);
}

Coverage mode_coverage(const Tensor& samples, const std::vector<std::vector<double>>& centers,
                       double radius) {
  if (!(radius > 0.0)) throw Error("mode_coverage: radius must be positive");
  if (samples.rank() != 2 || samples.rows() == 0) throw Error("mode_coverage: empty sample set");
  const std::size_t n = samples.rows(), d = samples.cols();
  const double r2 = radius * radius;
  std::vector<bool> hit(centers.size(), false);
  std::size_t good = 0;
  for (std::size_t r = 0; r < n; ++r) {
    bool near_any = false;
    for (std::size_t m = 0; m < centers.size(); ++m) {
      if (centers[m].size() != d) throw ShapeError("mode_coverage: center dimension mismatch");
      double dist2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = samples.at(r, j) - centers[m][j];
        dist2 += diff * diff;
      }
      if (dist2 <= r2) {
        hit[m] = true;
        near_any = true;
      }
    }
    good += near_any ? 1 : 0;
  }
  Coverage c;
  for (bool h : hit) c.modes_hit += h ? 1 : 0;
  c.hq_fraction = static_cast<double>(good) / static_cast<double>(n);
  return c;
}

GaussianSummary reference_summary(const DataDistribution& data, std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x7265666572656e63ULL));
  return GaussianSummary::fit(data.sample(rng, n));
}

SampleMetrics sample_metrics(const Tensor& samples, const DataDistribution& data,
                             const GaussianSummary& reference, double radius) {
  SampleMetrics m;
  m.proxy_fid = gaussian_frechet(GaussianSummary::fit(samples), reference);
  const auto c = mode_coverage(samples, data.centers, radius);
  m.modes_hit = c.modes_hit;
  m.hq_fraction = c.hq_fraction;
  return m;
}

Tensor generate_samples(const GanModel& model, const Tensor& z) {
  Environment env = model.environment();
  env.bind("eval.z", z);
  return evaluate(generate(model, input("eval.z", z.shape())), env);
}

Tensor refine_samples(const GanModel& model, const Tensor& z, const LatentOptConfig& config,
                      int steps) {
  if (steps == 0) return z;
  Environment env = model.environment();
  env.bind("eval.z", z);
  const auto r = refine_latent([&model](const Expression& zz) { return critic_value(model, zz); },
                               input("eval.z", z.shape()), config, steps);
  return evaluate(r.z_prime, env);
}

SampleMetrics evaluate_model(const GanModel& model, const DataDistribution& data,
                             const EvalSettings& settings) {
  const auto ref = reference_summary(data, settings.reference_samples, settings.seed);
  return sample_metrics(generate_samples(model, draw_latents(model, settings)), data, ref,
                        settings.radius);
}

std::vector<TruncationCurvePoint> truncation_sweep(const GanModel& model,
                                                   const std::vector<double>& s_values,
                                                   const DataDistribution& data,
                                                   const EvalSettings& settings) {
  for (double s : s_values) {
    if (!(s > 0.0 && s <= 1.0)) throw Error("truncation scale s must lie in (0, 1]");
  }
  const auto ref = reference_summary(data, settings.reference_samples, settings.seed);
  const Tensor z = draw_latents(model, settings);
  std::vector<TruncationCurvePoint> out;
  for (double s : s_values) {
    Tensor zs = z;
    for (auto& v : zs.mutable_data()) v *= s;
    zs = refine_samples(model, zs, settings.latent, settings.latent.eval_steps);
    const auto m = sample_metrics(generate_samples(model, zs), data, ref, settings.radius);
    out.push_back({s, m.proxy_fid, m.modes_hit, m.hq_fraction});
  }
  return out;
}

std::vector<StepSweepPoint> eval_latent_steps_sweep(const GanModel& model,
                                                    const std::vector<int>& step_counts,
                                                    const DataDistribution& data,
                                                    const EvalSettings& settings) {
  for (int k : step_counts) {
    if (k < 0) throw Error("eval step counts must be non-negative");
  }
  const auto ref = reference_summary(data, settings.reference_samples, settings.seed);
  const Tensor z = draw_latents(model, settings);
  Environment env = model.environment();
  const Expression zin = input("eval.z", z.shape());
  const Expression f = critic_value(model, zin);
  env.bind("eval.z", z);
  const Tensor f0 = evaluate(f, env);

  std::vector<StepSweepPoint> out;
  for (int k : step_counts) {
    const Tensor zk = refine_samples(model, z, settings.latent, k);
    env.bind("eval.z", zk);
    const Tensor fk = evaluate(f, env);
    StepSweepPoint p;
    p.steps = k;
    const auto m = sample_metrics(generate_samples(model, zk), data, ref, settings.radius);
    p.proxy_fid = m.proxy_fid;
    p.modes_hit = m.modes_hit;
    p.hq_fraction = m.hq_fraction;
    double gain = 0.0;
    for (std::size_t i = 0; i < f0.numel(); ++i) {
      gain += fk[i] - f0[i];
      if (fk[i] < f0[i]) ++p.ascent_violations;
    }
    p.mean_critic_gain = gain / static_cast<double>(f0.numel());
    out.push_back(p);
  }
  return out;
}

std::vector<std::optional<double>> moving_normalise(const std::vector<double>& series,
                                                    std::size_t window) {
  if (window < 2) throw Error("moving_normalise: window must be at least 2");
  if (series.size() < window) throw Error("moving_normalise: window longer than series");
  const std::size_t n = series.size() - window + 1;
  std::vector<std::optional<double>> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double mu = 0.0;
    for (std::size_t u = t; u < t + window; ++u) mu += series[u];
    mu /= static_cast<double>(window);
    double ss = 0.0;
    for (std::size_t u = t; u < t + window; ++u) ss += (series[u] - mu) * (series[u] - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(window - 1));
    if (sigma > 0.0) out[t] = series[t] / sigma;
  }
  return out;
}

}  // namespace logan
