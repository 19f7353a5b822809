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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tempconf/temporal_window.hpp"

namespace tempconf {

/// Calibration and abstention policy settings.
struct CalibConfig {
  double lambda = 0.7;        // blend of temporal uncertainty vs. inverse confidence
  double risk_level = 0.1;    // alpha; the tracker follows the (1 - alpha) quantile
  double budget = 0.15;       // long-run abstention budget b
  std::size_t warmup_steps = 48;
  double quantile_step = 0.01;
  std::size_t burst_window = 50;

  void validate() const;
};

/// r_t = lambda * U_t + (1 - lambda) * (1 - confidence).
double nonconformity(double uncertainty, double confidence, double lambda);

/// Online (1 - alpha) quantile of nonconformity scores.
///
/// The first `warmup_steps` scores are buffered and the estimate is their
/// nearest-rank empirical quantile. Once the buffer is full it is released and
/// the estimate follows q <- q + step * (1[r > q] - alpha), clamped to [0, 1].
class QuantileTracker {
 public:
  QuantileTracker(double risk_level, double step, std::size_t warmup_steps);

  void update(double score);

  double quantile() const noexcept { return q_; }
  bool warmed() const noexcept { return warmed_; }
  std::size_t warmup_count() const noexcept { return warmup_.size(); }
  std::size_t state_bytes() const noexcept;

 private:
  double risk_level_;
  double step_;
  std::size_t warmup_steps_;
  double q_ = 0.0;
  bool warmed_ = false;
  std::vector<double> warmup_;
};

/// Nearest-rank (1 - alpha) quantile: the ceil((1 - alpha) n)-th smallest value.
double empirical_quantile(std::vector<double> values, double risk_level);

/// Abstention bookkeeping for the budget rule.
class BudgetController {
 public:
  explicit BudgetController(std::size_t burst_window);

  void record(bool abstained);

  std::uint64_t abstain_count() const noexcept { return abstain_count_; }
  std::uint64_t step_count() const noexcept { return step_count_; }
  /// Abstentions among the last min(step_count, burst_window) decisions.
  std::size_t recent_abstentions() const noexcept { return recent_abstains_; }
  std::size_t burst_window() const noexcept { return recent_.size(); }
  double abstain_rate() const noexcept;
  std::size_t state_bytes() const noexcept;

 private:
  std::uint64_t abstain_count_ = 0;
  std::uint64_t step_count_ = 0;
  std::vector<std::uint8_t> recent_;
  std::size_t head_ = 0;
  std::size_t recent_abstains_ = 0;
};

/// True iff one more abstention keeps the long-run rate within `budget`, or
/// the recent burst window holds no abstention.
bool budget_allows(const BudgetController& controller, double budget);

enum class DecisionKind { kAccept, kAbstain };

struct Decision {
  DecisionKind kind = DecisionKind::kAccept;
  Label label = 0;       // meaningful for kAccept
  double score = 0.0;    // r_t
  double quantile = 0.0; // q at decision time
  bool warmup = true;    // decided before the tracker was calibrated

  bool abstained() const noexcept { return kind == DecisionKind::kAbstain; }
  friend bool operator==(const Decision&, const Decision&) = default;
};

/// Quantile tracker plus budget controller: the sequential calibration state.
class ConformalGate {
 public:
  explicit ConformalGate(const CalibConfig& cfg);

  /// Decides with the threshold built from earlier scores, records the
  /// decision, then folds `score` into the tracker.
  Decision step(double score, Label predicted_label);

  const QuantileTracker& tracker() const noexcept { return tracker_; }
  const BudgetController& controller() const noexcept { return controller_; }
  const CalibConfig& config() const noexcept { return cfg_; }
  std::size_t state_bytes() const noexcept;

  friend Decision decide(ConformalGate& gate, double score, Label predicted_label);

 private:
  CalibConfig cfg_;
  QuantileTracker tracker_;
  BudgetController controller_;
};

/// Accept during warm-up; afterwards abstain iff score >= q and the budget
/// allows it. Records post-warm-up decisions in the controller but does not
/// update the tracker.
Decision decide(ConformalGate& gate, double score, Label predicted_label);

}  // namespace tempconf
