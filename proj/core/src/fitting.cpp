// Copyright 2026 The tempconf Authors.
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

#include "tempconf/fitting.hpp"

#include <algorithm>
#include <cmath>

namespace tempconf {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double linear(const CombinerObjective::Vec& theta, const SignalVector& s) {
  const auto x = s.as_array();
  return theta[0] * x[0] + theta[1] * x[1] + theta[2] * x[2] + theta[3] * x[3] + theta[4];
}

double norm(const CombinerObjective::Vec& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Counts count_targets(std::span<const DevExample> examples) {
  Counts c;
  for (const auto& e : examples) (e.misclassified ? c.pos : c.neg)++;
  return c;
}

// Solves (A + ridge I) x = b for symmetric positive definite A by Cholesky.
// Returns false if the factorization breaks down.
bool cholesky_solve(std::array<double, 25> a, const CombinerObjective::Vec& b,
                    CombinerObjective::Vec& x) {
  constexpr int n = 5;
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    a[j * n + j] = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / a[j * n + j];
    }
  }
  CombinerObjective::Vec y{};
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i * n + k] * y[k];
    y[i] = s / a[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
    x[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

void FitConfig::validate() const {
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("l2 must be >= 0");
  if (max_iters == 0) throw std::invalid_argument("max_iters must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

CombinerObjective::CombinerObjective(std::span<const DevExample> examples, double l2,
                                     bool class_balance)
    : examples_(examples.begin(), examples.end()), l2_(l2) {
  if (examples_.empty()) throw std::invalid_argument("objective needs examples");
  std::sort(examples_.begin(), examples_.end(), [](const DevExample& a, const DevExample& b) {
    const auto x = a.signals.as_array();
    const auto y = b.signals.as_array();
    if (x != y) return x < y;
    return a.misclassified < b.misclassified;
  });
  const Counts c = count_targets(examples_);
  if (class_balance && c.pos > 0 && c.neg > 0) {
    const double n = static_cast<double>(examples_.size());
    weight_pos_ = n / (2.0 * static_cast<double>(c.pos));
    weight_neg_ = n / (2.0 * static_cast<double>(c.neg));
  }
}

CombinerObjective::Vec CombinerObjective::pack(const CombinerParams& p) noexcept {
  return {p.weights[0], p.weights[1], p.weights[2], p.weights[3], p.bias};
}

CombinerParams CombinerObjective::unpack(const Vec& theta) noexcept {
  return CombinerParams{{theta[0], theta[1], theta[2], theta[3]}, theta[4]};
}

double CombinerObjective::value(const Vec& theta) const {
  double loss = 0.0;
  for (const auto& e : examples_) {
    const double z = linear(theta, e.signals);
    const double y = e.misclassified ? 1.0 : 0.0;
    loss += (e.misclassified ? weight_pos_ : weight_neg_) * (softplus(z) - y * z);
  }
  loss /= static_cast<double>(examples_.size());
  double reg = 0.0;
  for (int i = 0; i < 4; ++i) reg += theta[i] * theta[i];
  return loss + 0.5 * l2_ * reg;
}

CombinerObjective::Vec CombinerObjective::gradient(const Vec& theta) const {
  Vec g{};
  for (const auto& e : examples_) {
    const auto x = e.signals.as_array();
    const double y = e.misclassified ? 1.0 : 0.0;
    const double r = (e.misclassified ? weight_pos_ : weight_neg_) *
                     (logistic(linear(theta, e.signals)) - y);
    for (int i = 0; i < 4; ++i) g[i] += r * x[i];
    g[4] += r;
  }
  const double n = static_cast<double>(examples_.size());
  for (int i = 0; i < 5; ++i) g[i] /= n;
  for (int i = 0; i < 4; ++i) g[i] += l2_ * theta[i];
  return g;
}

std::array<double, 25> CombinerObjective::hessian(const Vec& theta) const {
  std::array<double, 25> h{};
  for (const auto& e : examples_) {
    const auto s = e.signals.as_array();
    const std::array<double, 5> x{s[0], s[1], s[2], s[3], 1.0};
    const double p = logistic(linear(theta, e.signals));
    const double c = (e.misclassified ? weight_pos_ : weight_neg_) * p * (1.0 - p);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) h[i * 5 + j] += c * x[i] * x[j];
    }
  }
  const double n = static_cast<double>(examples_.size());
  for (double& v : h) v /= n;
  for (int i = 0; i < 4; ++i) h[i * 5 + i] += l2_;
  return h;
}

FitResult fit_combiner_detailed(std::span<const DevExample> examples, const FitConfig& cfg) {
  cfg.validate();
  if (examples.size() < 2) throw std::invalid_argument("need at least two dev examples");
  for (const auto& e : examples) {
    for (double v : e.signals.as_array()) {
      if (!std::isfinite(v)) throw std::invalid_argument("dev example has non-finite signal");
    }
  }
  const Counts c = count_targets(examples);
  if (c.pos == 0 || c.neg == 0) throw DegenerateDevSet();

  const CombinerObjective objective(examples, cfg.l2, cfg.class_balance);
  CombinerObjective::Vec theta{};
  double f = objective.value(theta);

  FitResult result;
  result.objective_trace.push_back(f);
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    const auto g = objective.gradient(theta);
    result.gradient_norm = norm(g);
    if (result.gradient_norm <= cfg.tol) {
      result.converged = true;
      break;
    }

    // Newton direction, regularized until the factorization succeeds.
    CombinerObjective::Vec dir{};
    auto h = objective.hessian(theta);
    double ridge = 0.0;
    while (!cholesky_solve(h, g, dir)) {
      ridge = ridge == 0.0 ? 1e-10 : ridge * 10.0;
      for (int i = 0; i < 5; ++i) h[i * 5 + i] += ridge;
      if (ridge > 1e6) {
        dir = g;
        break;
      }
    }
    double slope = 0.0;
    for (int i = 0; i < 5; ++i) slope += g[i] * dir[i];
    if (!(slope > 0.0)) {
      dir = g;
      slope = result.gradient_norm * result.gradient_norm;
    }

    double step = 1.0;
    bool accepted = false;
    CombinerObjective::Vec trial{};
    double f_trial = f;
    while (step > 1e-12) {
      for (int i = 0; i < 5; ++i) trial[i] = theta[i] - step * dir[i];
      f_trial = objective.value(trial);
      if (f_trial <= f - 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++result.iterations;
    if (!accepted) {
      // No representable decrease left along the descent direction.
      result.converged = result.gradient_norm <= std::sqrt(cfg.tol);
      break;
    }
    theta = trial;
    f = f_trial;
    result.objective_trace.push_back(f);
  }
  if (!result.converged) {
    result.gradient_norm = norm(objective.gradient(theta));
    result.converged = result.gradient_norm <= cfg.tol;
  }
  result.params = CombinerObjective::unpack(theta);
  return result;
}

CombinerParams fit_combiner(std::span<const DevExample> examples, const FitConfig& cfg) {
  return fit_combiner_detailed(examples, cfg).params;
}

std::vector<DevExample> collect_dev_examples(std::span<const StreamRecord> records,
                                             std::size_t window, const SignalConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("empty development stream");
  cfg.validate(window);
  const std::size_t classes = records.front().posterior.size();
  const std::size_t dim = records.front().feature.size();
  TemporalWindow buffer(window, classes, dim);
  std::vector<DevExample> out;
  for (const auto& rec : records) {
    const Label predicted = argmax(rec.posterior);
    const SignalVector s = compute_signals(buffer, rec.posterior, rec.feature, predicted, cfg);
    if (rec.has_class_label()) out.push_back(DevExample{s, predicted != *rec.label});
    buffer.push(rec.posterior, rec.feature, predicted);
  }
  return out;
}

CombinerEval eval_combiner(const CombinerParams& params, std::span<const DevExample> examples,
                           bool class_balance) {
  if (examples.empty()) throw std::invalid_argument("eval_combiner needs examples");
  const Counts c = count_targets(examples);
  double wp = 1.0;
  double wn = 1.0;
  const double n = static_cast<double>(examples.size());
  if (class_balance && c.pos > 0 && c.neg > 0) {
    wp = n / (2.0 * static_cast<double>(c.pos));
    wn = n / (2.0 * static_cast<double>(c.neg));
  }
  const auto theta = CombinerObjective::pack(params);
  CombinerEval out;
  std::size_t correct = 0;
  for (const auto& e : examples) {
    const double z = linear(theta, e.signals);
    const double y = e.misclassified ? 1.0 : 0.0;
    out.log_loss += (e.misclassified ? wp : wn) * (softplus(z) - y * z);
    if ((z > 0.0) == e.misclassified) ++correct;
  }
  out.log_loss /= n;
  out.accuracy = static_cast<double>(correct) / n;
  return out;
}

}  // namespace tempconf
