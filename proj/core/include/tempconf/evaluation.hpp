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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tempconf/conformal.hpp"
#include "tempconf/temporal_window.hpp"

namespace tempconf {

/// Ground-truth status of one stream step.
enum class Outcome : std::uint8_t { kCorrect, kWrong, kUnlabeled };

/// Correctness of each record's argmax; OOD and unlabeled records map to kUnlabeled.
std::vector<Outcome> outcomes_of(std::span<const StreamRecord> records);

/// Moving accuracy over the last m labeled predictions (ASW), one value per
/// step; nullopt until the first labeled prediction.
std::vector<std::optional<double>> sliding_accuracy(std::span<const Outcome> outcomes,
                                                    std::size_t m);

/// Moving mean over the last min(i + 1, m) values (CSW when fed a confidence series).
std::vector<double> sliding_mean(std::span<const double> values, std::size_t m);

/// Nominal accuracy band of an ID stream: mean and standard deviation of ASW.
struct IDBand {
  double mu = 0.0;
  double sigma = 0.0;

  /// ASW at or below this value marks a drop event.
  double threshold() const noexcept { return mu - 3.0 * sigma; }
};

/// Band from the ASW series at steps m, m + 1, ... of an ID stream.
/// Throws std::invalid_argument when the stream has no more than m steps.
IDBand id_band(std::span<const Outcome> id_stream, std::size_t m);

struct EventCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  std::uint64_t positives() const noexcept { return tp + fn; }
  friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

/// A scored step of the drop-detection protocol.
struct ScoredStep {
  std::size_t index = 0;
  double csw = 0.0;
  bool event = false;  // ASW <= mu_ID - 3 sigma_ID
};

/// Steps i >= m with a defined ASW, with CSW computed from `scores`.
/// Throws std::invalid_argument if the series lengths differ.
std::vector<ScoredStep> drop_detection_steps(std::span<const Outcome> outcomes,
                                             const IDBand& band, std::size_t m,
                                             std::span<const double> scores);

/// TP: CSW < rho and event; FP: CSW < rho, no event; TN/FN otherwise.
/// A step with CSW == rho is not flagged.
EventCounts label_events(std::span<const Outcome> outcomes, const IDBand& band, std::size_t m,
                         double rho, std::span<const double> scores);
EventCounts count_events(std::span<const ScoredStep> steps, double rho);

struct PrPoint {
  double threshold = 0.0;
  EventCounts counts;
  double precision() const noexcept;
  double recall() const noexcept;
};

class NoPositiveEvents : public std::runtime_error {
 public:
  NoPositiveEvents() : std::runtime_error("no drop events to detect") {}
};

/// PR sweep for drop detection with rho over the unique CSW values plus
/// {0, 1}, ascending. Steps from several replica streams may be pooled, which
/// sums their counts per threshold.
std::vector<PrPoint> drop_pr_curve(std::span<const ScoredStep> steps);

/// Area under a PR curve ordered by non-decreasing recall, by trapezoids,
/// anchored at recall 0 with the first defined precision. Points without any
/// flagged step are skipped. Throws NoPositiveEvents if there are no positives.
double auprc(std::span<const PrPoint> curve);

/// PR sweep for "score >= threshold means positive", thresholds descending.
std::vector<PrPoint> score_pr_curve(std::span<const double> scores,
                                    const std::vector<bool>& positive);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC points from (0, 0) to (1, 1) sweeping unique score thresholds.
std::vector<RocPoint> roc_curve(std::span<const double> scores, const std::vector<bool>& positive);
double trapezoid_auc(std::span<const RocPoint> curve);

/// Mann-Whitney AUROC: P(score of a random positive > random negative), ties
/// counted 1/2. Throws std::invalid_argument unless both classes occur.
double auroc(std::span<const double> scores, const std::vector<bool>& positive);

/// Multi-class Brier score.
double brier(std::span<const std::vector<double>> posteriors, std::span<const Label> labels);

/// Mean negative log-likelihood with p(y) floored at 1e-12.
double nll(std::span<const std::vector<double>> posteriors, std::span<const Label> labels);

/// Expected calibration error over `bins` equal-width bins (lo, hi]; a
/// confidence of exactly 0 falls in the first bin.
double ece(std::span<const double> confidences, const std::vector<bool>& correct,
           std::size_t bins = 15);

/// |mean(1[r_t >= q_t]) - alpha|.
double exceedance_deviation(std::span<const double> scores, std::span<const double> quantiles,
                            double alpha);

struct BudgetAdherence {
  double longrun = 0.0;       // |b_hat - b|
  double worst_window = 0.0;  // highest abstain fraction over any burst window
};

BudgetAdherence budget_adherence(std::span<const Decision> decisions, double budget,
                                 std::size_t burst_window);

/// Median steps from each drop-event onset to the first step with CSW < rho.
/// Steps must come from one stream, in order. Onsets never alarmed are
/// ignored; nullopt when no onset is detected.
std::optional<double> median_detection_delay(std::span<const ScoredStep> steps, double rho);

/// Threshold of the curve point with the highest F1 (first on ties).
double best_f1_threshold(std::span<const PrPoint> curve);

/// Flat "name value" report, one metric per line, in insertion order.
class MetricsReport {
 public:
  void add(const std::string& name, double value);
  void add_count(const std::string& name, std::uint64_t value);
  void skip(const std::string& name, const std::string& reason);

  const std::vector<std::pair<std::string, std::string>>& lines() const noexcept { return lines_; }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace tempconf
