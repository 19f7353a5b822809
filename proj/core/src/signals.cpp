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

#include "tempconf/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tempconf {

std::vector<double> SignalConfig::inverse_lag_weights(std::span<const std::size_t> lags) {
  std::vector<double> weights;
  weights.reserve(lags.size());
  double total = 0.0;
  for (std::size_t lag : lags) {
    if (lag == 0) throw std::invalid_argument("lags must be positive");
    weights.push_back(1.0 / static_cast<double>(lag));
    total += weights.back();
  }
  for (double& w : weights) w /= total;
  return weights;
}

void SignalConfig::validate(std::size_t window_capacity) const {
  if (lags.empty()) throw std::invalid_argument("lag set is empty");
  if (lags.size() != lag_weights.size()) {
    throw std::invalid_argument("lag_weights must have one entry per lag");
  }
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] == 0 || lags[i] > window_capacity) {
      throw std::invalid_argument("lag " + std::to_string(lags[i]) + " outside [1, W=" +
                                  std::to_string(window_capacity) + "]");
    }
    if (i > 0 && lags[i] <= lags[i - 1]) {
      throw std::invalid_argument("lag set must be strictly increasing");
    }
  }
  double sum = 0.0;
  for (double w : lag_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("lag weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("lag weights must sum to 1");
  if (!(proxy_blend >= 0.0 && proxy_blend <= 1.0)) {
    throw std::invalid_argument("proxy_blend must lie in [0, 1]");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be a finite non-negative value");
  }
}

double jsd(std::span<const double> p, std::span<const double> q, double epsilon) {
  if (p.size() != q.size()) throw std::invalid_argument("jsd: length mismatch");
  if (p.size() < 2) throw std::invalid_argument("jsd: need at least two classes");
  const double norm = 1.0 + static_cast<double>(p.size()) * epsilon;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i]) || std::isnan(q[i])) throw std::invalid_argument("jsd: NaN input");
    if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument("jsd: negative probability");
    const double a = (p[i] + epsilon) / norm;
    const double b = (q[i] + epsilon) / norm;
    const double m = 0.5 * (a + b);
    // 0 * log 0 = 0. Summing the pair first keeps jsd(p, q) == jsd(q, p) bitwise.
    const double ta = a > 0.0 ? a * std::log(a / m) : 0.0;
    const double tb = b > 0.0 ? b * std::log(b / m) : 0.0;
    total += ta + tb;
  }
  return std::clamp(0.5 * total, 0.0, std::numbers::ln2);
}

Label argmax(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("argmax of empty vector");
  return static_cast<Label>(std::max_element(p.begin(), p.end()) - p.begin());
}

double max_confidence(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("max_confidence of empty vector");
  return *std::max_element(p.begin(), p.end());
}

double probability_margin(std::span<const double> p) {
  if (p.size() < 2) throw std::invalid_argument("margin needs at least two classes");
  double top1 = -1.0;
  double top2 = -1.0;
  for (double v : p) {
    if (v > top1) {
      top2 = top1;
      top1 = v;
    } else if (v > top2) {
      top2 = v;
    }
  }
  return top1 - top2;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: length mismatch");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double divergence_signal(const TemporalWindow& window, std::span<const double> current,
                         const SignalConfig& cfg) {
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < cfg.lags.size(); ++i) {
    if (!window.has_lag(cfg.lags[i])) continue;
    weighted += cfg.lag_weights[i] * jsd(current, window.lag(cfg.lags[i]).posterior, cfg.epsilon);
    weight_sum += cfg.lag_weights[i];
  }
  return weight_sum > 0.0 ? weighted / weight_sum : 0.0;
}

double stability_signal(const TemporalWindow& window, std::span<const double> current_feature,
                        const SignalConfig& cfg) {
  if (!window.has_features()) {
    throw std::logic_error("stability_signal called on a window without features");
  }
  if (current_feature.size() != window.feature_dim()) {
    throw DimensionMismatch("current feature length does not match window");
  }
  double sum = 0.0;
  std::size_t available = 0;
  for (std::size_t lag : cfg.lags) {
    if (!window.has_lag(lag)) continue;
    sum += cosine_similarity(current_feature, window.lag(lag).feature);
    ++available;
  }
  return available == 0 ? 1.0 : sum / static_cast<double>(available);
}

double confidence_proxy(std::span<const double> posterior, double blend) {
  if (posterior.size() < 2) throw std::invalid_argument("confidence proxy needs L >= 2");
  if (!(blend >= 0.0 && blend <= 1.0)) {
    throw std::invalid_argument("confidence proxy blend must lie in [0, 1]");
  }
  const double c = max_confidence(posterior);
  const double margin = probability_margin(posterior);
  return std::clamp(blend * (1.0 - c) + (1.0 - blend) * (1.0 - margin), 0.0, 1.0);
}

double logistic(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double uncertainty_score(const SignalVector& signals, const CombinerParams& params) {
  const auto s = signals.as_array();
  double z = params.bias;
  for (std::size_t i = 0; i < s.size(); ++i) z += params.weights[i] * s[i];
  return logistic(z);
}

SignalVector compute_signals(const TemporalWindow& window, std::span<const double> posterior,
                             std::span<const double> feature, Label predicted_label,
                             const SignalConfig& cfg) {
  SignalVector s;
  s.divergence = divergence_signal(window, posterior, cfg);
  s.instability = window.has_features() ? 1.0 - stability_signal(window, feature, cfg) : 0.0;
  s.inconsistency = 1.0 - persistence_signal(window, predicted_label, cfg);
  s.proxy = confidence_proxy(posterior, cfg.proxy_blend);
  return s;
}

}  // namespace tempconf
