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

#include "tempconf/monitor.hpp"

#include <cmath>
#include <string>

namespace tempconf {

void MonitorConfig::validate() const {
  if (window == 0) throw std::invalid_argument("window W must be positive");
  signals.validate(window);
  calib.validate();
}

Monitor::Monitor(const MonitorConfig& cfg, const CombinerParams& params, std::size_t classes,
                 std::size_t feature_dim, bool quantized)
    : cfg_(cfg),
      params_(params),
      classes_(classes),
      feature_dim_(feature_dim),
      gate_(cfg.calib) {
  cfg_.validate();
  if (classes < 2) throw std::invalid_argument("monitor needs at least two classes");
  for (double w : params.weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("combiner weights must be finite");
  }
  if (!std::isfinite(params.bias)) throw std::invalid_argument("combiner bias must be finite");
  if (quantized) {
    quantized_window_.emplace(cfg.window, classes, feature_dim);
    lut_.emplace();
  } else {
    window_.emplace(cfg.window, classes, feature_dim);
  }
}

StepResult Monitor::step(std::span<const double> posterior, std::span<const double> feature) {
  if (posterior.size() != classes_) {
    throw DimensionMismatch("posterior length " + std::to_string(posterior.size()) +
                            " != " + std::to_string(classes_));
  }
  if (feature.size() != feature_dim_) {
    throw DimensionMismatch("feature length " + std::to_string(feature.size()) +
                            " != " + std::to_string(feature_dim_));
  }
  validate_posterior(posterior);

  StepResult out;
  const Label label = argmax(posterior);
  out.signals = quantized_window_
                    ? compute_signals_quantized(*quantized_window_, posterior, feature, label,
                                                *lut_, cfg_.signals)
                    : compute_signals(*window_, posterior, feature, label, cfg_.signals);
  out.uncertainty = uncertainty_score(out.signals, params_);
  out.confidence = max_confidence(posterior);
  const double r = nonconformity(out.uncertainty, out.confidence, cfg_.calib.lambda);
  out.decision = gate_.step(r, label);

  if (quantized_window_) {
    quantized_window_->push(posterior, feature, label);
  } else {
    window_->push(posterior, feature, label);
  }
  ++steps_;
  return out;
}

std::size_t Monitor::state_bytes() const noexcept {
  std::size_t bytes = gate_.state_bytes() + sizeof(params_);
  if (window_) bytes += window_->state_bytes();
  if (quantized_window_) bytes += quantized_window_->state_bytes();
  return bytes;
}

}  // namespace tempconf
