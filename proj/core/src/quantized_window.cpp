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

#include "tempconf/quantized.hpp"

namespace tempconf {

QuantizedWindow::QuantizedWindow(std::size_t capacity, std::size_t classes,
                                 std::size_t feature_dim)
    : classes_(classes),
      feature_dim_(feature_dim),
      cursor_(capacity),
      posterior_codes_(capacity * classes),
      posterior_scales_(capacity),
      feature_codes_(capacity * feature_dim),
      feature_scales_(capacity),
      labels_(capacity, 0) {
  if (classes < 2) throw std::invalid_argument("window needs at least two classes");
}

void QuantizedWindow::push(std::span<const double> posterior, std::span<const double> feature,
                           Label predicted_label) {
  if (posterior.size() != classes_) throw DimensionMismatch("posterior length mismatch");
  if (feature.size() != feature_dim_) throw DimensionMismatch("feature length mismatch");
  // Validate before touching the ring so a rejected push leaves it unchanged.
  if (!(max_confidence(posterior) > 0.0)) {
    throw std::invalid_argument("posterior has no positive entry");
  }
  const std::size_t slot = cursor_.advance();
  quantize_posterior_into(
      posterior,
      std::span<std::uint8_t>(posterior_codes_).subspan(slot * classes_, classes_),
      posterior_scales_[slot]);
  quantize_feature_into(
      feature, std::span<std::int8_t>(feature_codes_).subspan(slot * feature_dim_, feature_dim_),
      feature_scales_[slot]);
  labels_[slot] = predicted_label;
}

QuantizedWindow::Entry QuantizedWindow::lag(std::size_t lag) const {
  const std::size_t slot = cursor_.slot_for_lag(lag);
  return Entry{
      QuantizedPosteriorView(
          std::span<const std::uint8_t>(posterior_codes_).subspan(slot * classes_, classes_),
          posterior_scales_[slot]),
      std::span<const std::int8_t>(feature_codes_).subspan(slot * feature_dim_, feature_dim_),
      feature_scales_[slot],
      labels_[slot],
  };
}

std::size_t QuantizedWindow::state_bytes() const noexcept {
  return sizeof(*this) + posterior_codes_.capacity() + posterior_scales_.capacity() * sizeof(double) +
         feature_codes_.capacity() + feature_scales_.capacity() * sizeof(double) +
         labels_.capacity() * sizeof(Label);
}

double divergence_signal_quantized(const QuantizedWindow& window, QuantizedPosteriorView current,
                                   const LogLUT& lut, const SignalConfig& cfg) {
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < cfg.lags.size(); ++i) {
    if (!window.has_lag(cfg.lags[i])) continue;
    weighted += cfg.lag_weights[i] *
                jsd_quantized(current, window.lag(cfg.lags[i]).posterior, lut, cfg.epsilon);
    weight_sum += cfg.lag_weights[i];
  }
  return weight_sum > 0.0 ? weighted / weight_sum : 0.0;
}

double stability_signal_quantized(const QuantizedWindow& window,
                                  std::span<const std::int8_t> current_feature,
                                  const SignalConfig& cfg) {
  if (!window.has_features()) {
    throw std::logic_error("stability signal requested on a window without features");
  }
  double sum = 0.0;
  std::size_t available = 0;
  for (std::size_t lag : cfg.lags) {
    if (!window.has_lag(lag)) continue;
    sum += cosine_int<std::int8_t>(current_feature, window.lag(lag).feature);
    ++available;
  }
  return available == 0 ? 1.0 : sum / static_cast<double>(available);
}

SignalVector compute_signals_quantized(const QuantizedWindow& window,
                                       std::span<const double> posterior,
                                       std::span<const double> feature, Label predicted_label,
                                       const LogLUT& lut, const SignalConfig& cfg) {
  if (posterior.size() != window.classes()) throw DimensionMismatch("posterior length mismatch");
  if (feature.size() != window.feature_dim()) throw DimensionMismatch("feature length mismatch");

  const QuantizedPosterior current = quantize_posterior(posterior);

  SignalVector s;
  s.divergence = divergence_signal_quantized(window, current, lut, cfg);
  if (window.has_features()) {
    const QuantizedFeature f = quantize_feature(feature);
    s.instability = 1.0 - stability_signal_quantized(window, f.codes, cfg);
  }
  s.inconsistency = 1.0 - persistence_signal(window, predicted_label, cfg);
  s.proxy = confidence_proxy(posterior, cfg.proxy_blend);
  return s;
}

}  // namespace tempconf
