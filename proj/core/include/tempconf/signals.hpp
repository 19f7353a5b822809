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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tempconf/temporal_window.hpp"

namespace tempconf {

/// Lag set, lag mixture weights, proxy blend and probability smoothing.
struct SignalConfig {
  std::vector<std::size_t> lags{1, 2, 4};
  std::vector<double> lag_weights{4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0};
  double proxy_blend = 0.5;
  double epsilon = 1e-6;

  /// Weights proportional to 1/lag, normalized to sum to one.
  static std::vector<double> inverse_lag_weights(std::span<const std::size_t> lags);

  /// Throws std::invalid_argument when the configuration is inconsistent or a
  /// lag exceeds `window_capacity`.
  void validate(std::size_t window_capacity) const;
};

/// s_t = [D_t, 1 - S_t, 1 - c_t, m_t].
struct SignalVector {
  double divergence = 0.0;
  double instability = 0.0;
  double inconsistency = 0.0;
  double proxy = 0.0;

  std::array<double, 4> as_array() const noexcept {
    return {divergence, instability, inconsistency, proxy};
  }
  static SignalVector from_array(const std::array<double, 4>& a) noexcept {
    return {a[0], a[1], a[2], a[3]};
  }

  friend bool operator==(const SignalVector&, const SignalVector&) = default;
};

/// Logistic combiner parameters (w, b).
struct CombinerParams {
  std::array<double, 4> weights{};
  double bias = 0.0;

  friend bool operator==(const CombinerParams&, const CombinerParams&) = default;
};

/// Jensen-Shannon divergence (natural log) of the epsilon-smoothed inputs
/// (p + eps) / (1 + L eps). Result lies in [0, ln 2].
double jsd(std::span<const double> p, std::span<const double> q, double epsilon);

/// Index of the largest entry; ties resolve to the lowest index.
Label argmax(std::span<const double> p);
double max_confidence(std::span<const double> p);

/// Top-1 minus top-2 probability. Requires at least two classes.
double probability_margin(std::span<const double> p);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Weighted multi-lag JSD against buffered posteriors. Weights are
/// renormalized over the lags currently available; 0 with no history.
double divergence_signal(const TemporalWindow& window, std::span<const double> current,
                         const SignalConfig& cfg);

/// Mean cosine between the current and lagged features over available lags;
/// 1 with no history. Throws std::logic_error if the window has no features.
double stability_signal(const TemporalWindow& window, std::span<const double> current_feature,
                        const SignalConfig& cfg);

/// Fraction of available lags whose predicted label equals `current_label`;
/// 1 with no history. Works with any window exposing has_lag() and lag().
template <typename Window>
double persistence_signal(const Window& window, Label current_label, const SignalConfig& cfg) {
  std::size_t available = 0;
  std::size_t agree = 0;
  for (std::size_t lag : cfg.lags) {
    if (!window.has_lag(lag)) continue;
    ++available;
    if (window.lag(lag).predicted_label == current_label) ++agree;
  }
  if (available == 0) return 1.0;
  return static_cast<double>(agree) / static_cast<double>(available);
}

/// m_t = blend * (1 - C) + (1 - blend) * (1 - margin).
double confidence_proxy(std::span<const double> posterior, double blend);

/// Numerically stable logistic function.
double logistic(double z) noexcept;

/// U_t = logistic(w . s_t + b).
double uncertainty_score(const SignalVector& signals, const CombinerParams& params);

/// All four signals for the current step against the window contents. The
/// current step must not yet be pushed. With features disabled the
/// instability slot is 0.
SignalVector compute_signals(const TemporalWindow& window, std::span<const double> posterior,
                             std::span<const double> feature, Label predicted_label,
                             const SignalConfig& cfg);

}  // namespace tempconf
