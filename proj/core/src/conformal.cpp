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

#include "tempconf/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tempconf {

void CalibConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(risk_level > 0.0 && risk_level < 1.0)) {
    throw std::invalid_argument("risk_level must lie in (0, 1)");
  }
  if (!(budget >= 0.0 && budget <= 1.0)) throw std::invalid_argument("budget must lie in [0, 1]");
  if (warmup_steps == 0) throw std::invalid_argument("warmup_steps must be positive");
  if (!(quantile_step > 0.0) || !std::isfinite(quantile_step)) {
    throw std::invalid_argument("quantile_step must be positive");
  }
  if (burst_window == 0) throw std::invalid_argument("burst_window must be positive");
}

double nonconformity(double uncertainty, double confidence, double lambda) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(uncertainty) || !in_unit(confidence) || !in_unit(lambda)) {
    throw std::invalid_argument("nonconformity inputs must lie in [0, 1]");
  }
  return lambda * uncertainty + (1.0 - lambda) * (1.0 - confidence);
}

double empirical_quantile(std::vector<double> values, double risk_level) {
  if (values.empty()) throw std::invalid_argument("empirical quantile of empty set");
  const double n = static_cast<double>(values.size());
  // Guard against 0.9 * 10 landing a hair above 9.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - risk_level) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

QuantileTracker::QuantileTracker(double risk_level, double step, std::size_t warmup_steps)
    : risk_level_(risk_level), step_(step), warmup_steps_(warmup_steps) {
  if (warmup_steps == 0) throw std::invalid_argument("warmup_steps must be positive");
  warmup_.reserve(warmup_steps);
}

void QuantileTracker::update(double score) {
  if (!warmed_) {
    warmup_.push_back(score);
    q_ = empirical_quantile(warmup_, risk_level_);
    if (warmup_.size() >= warmup_steps_) {
      warmed_ = true;
      std::vector<double>().swap(warmup_);
    }
    return;
  }
  const double exceed = score > q_ ? 1.0 : 0.0;
  q_ = std::clamp(q_ + step_ * (exceed - risk_level_), 0.0, 1.0);
}

std::size_t QuantileTracker::state_bytes() const noexcept {
  return sizeof(*this) + warmup_.capacity() * sizeof(double);
}

BudgetController::BudgetController(std::size_t burst_window) : recent_(burst_window, 0) {
  if (burst_window == 0) throw std::invalid_argument("burst_window must be positive");
}

void BudgetController::record(bool abstained) {
  ++step_count_;
  if (abstained) ++abstain_count_;
  recent_abstains_ -= recent_[head_];
  recent_[head_] = abstained ? 1 : 0;
  recent_abstains_ += recent_[head_];
  head_ = (head_ + 1) % recent_.size();
}

double BudgetController::abstain_rate() const noexcept {
  return step_count_ == 0 ? 0.0
                          : static_cast<double>(abstain_count_) / static_cast<double>(step_count_);
}

std::size_t BudgetController::state_bytes() const noexcept {
  return sizeof(*this) + recent_.capacity() * sizeof(std::uint8_t);
}

bool budget_allows(const BudgetController& controller, double budget) {
  const double next_rate = static_cast<double>(controller.abstain_count() + 1) /
                           static_cast<double>(controller.step_count() + 1);
  return next_rate <= budget || controller.recent_abstentions() == 0;
}

ConformalGate::ConformalGate(const CalibConfig& cfg)
    : cfg_(cfg),
      tracker_(cfg.risk_level, cfg.quantile_step, cfg.warmup_steps),
      controller_(cfg.burst_window) {
  cfg_.validate();
}

Decision decide(ConformalGate& gate, double score, Label predicted_label) {
  Decision d;
  d.score = score;
  d.label = predicted_label;
  d.quantile = gate.tracker_.quantile();
  d.warmup = !gate.tracker_.warmed();
  if (d.warmup) {
    return d;
  }
  if (score >= d.quantile && budget_allows(gate.controller_, gate.cfg_.budget)) {
    d.kind = DecisionKind::kAbstain;
  }
  gate.controller_.record(d.abstained());
  return d;
}

Decision ConformalGate::step(double score, Label predicted_label) {
  Decision d = decide(*this, score, predicted_label);
  tracker_.update(score);
  return d;
}

std::size_t ConformalGate::state_bytes() const noexcept {
  return sizeof(cfg_) + tracker_.state_bytes() + controller_.state_bytes();
}

}  // namespace tempconf
