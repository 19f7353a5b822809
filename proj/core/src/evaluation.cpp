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

#include "tempconf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tempconf/signals.hpp"

namespace tempconf {

std::vector<Outcome> outcomes_of(std::span<const StreamRecord> records) {
  std::vector<Outcome> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.has_class_label()) {
      out.push_back(Outcome::kUnlabeled);
    } else {
      out.push_back(argmax(r.posterior) == *r.label ? Outcome::kCorrect : Outcome::kWrong);
    }
  }
  return out;
}

std::vector<std::optional<double>> sliding_accuracy(std::span<const Outcome> outcomes,
                                                    std::size_t m) {
  if (m == 0) throw std::invalid_argument("window m must be positive");
  std::vector<std::optional<double>> asw(outcomes.size());
  std::vector<std::uint8_t> ring(m, 0);
  std::size_t head = 0;
  std::size_t filled = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i] != Outcome::kUnlabeled) {
      const std::uint8_t hit = outcomes[i] == Outcome::kCorrect ? 1 : 0;
      if (filled == m) correct -= ring[head];
      ring[head] = hit;
      correct += hit;
      head = (head + 1) % m;
      filled = std::min(filled + 1, m);
    }
    if (filled > 0) asw[i] = static_cast<double>(correct) / static_cast<double>(filled);
  }
  return asw;
}

std::vector<double> sliding_mean(std::span<const double> values, std::size_t m) {
  if (m == 0) throw std::invalid_argument("window m must be positive");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= m) sum -= values[i - m];
    out[i] = sum / static_cast<double>(std::min(i + 1, m));
  }
  return out;
}

IDBand id_band(std::span<const Outcome> id_stream, std::size_t m) {
  if (id_stream.size() <= m) {
    throw std::invalid_argument("ID stream must be longer than the window m");
  }
  const auto asw = sliding_accuracy(id_stream, m);
  std::vector<double> values;
  for (std::size_t i = m; i < asw.size(); ++i) {
    if (asw[i]) values.push_back(*asw[i]);
  }
  if (values.empty()) throw std::invalid_argument("ID stream has no labeled predictions");
  const double n = static_cast<double>(values.size());
  const double mu = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mu) * (v - mu);
  return IDBand{mu, std::sqrt(var / n)};
}

std::vector<ScoredStep> drop_detection_steps(std::span<const Outcome> outcomes,
                                             const IDBand& band, std::size_t m,
                                             std::span<const double> scores) {
  if (outcomes.size() != scores.size()) {
    throw std::invalid_argument("scores are not aligned with the stream");
  }
  const auto asw = sliding_accuracy(outcomes, m);
  const auto csw = sliding_mean(scores, m);
  const double threshold = band.threshold();
  std::vector<ScoredStep> steps;
  for (std::size_t i = m; i < outcomes.size(); ++i) {
    if (!asw[i]) continue;
    steps.push_back(ScoredStep{i, csw[i], *asw[i] <= threshold});
  }
  return steps;
}

EventCounts count_events(std::span<const ScoredStep> steps, double rho) {
  EventCounts c;
  for (const auto& s : steps) {
    const bool flagged = s.csw < rho;
    if (flagged) {
      (s.event ? c.tp : c.fp)++;
    } else {
      (s.event ? c.fn : c.tn)++;
    }
  }
  return c;
}

EventCounts label_events(std::span<const Outcome> outcomes, const IDBand& band, std::size_t m,
                         double rho, std::span<const double> scores) {
  return count_events(drop_detection_steps(outcomes, band, m, scores), rho);
}

double PrPoint::precision() const noexcept {
  const auto flagged = counts.tp + counts.fp;
  return flagged == 0 ? 1.0 : static_cast<double>(counts.tp) / static_cast<double>(flagged);
}

double PrPoint::recall() const noexcept {
  const auto pos = counts.positives();
  return pos == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(pos);
}

std::vector<PrPoint> drop_pr_curve(std::span<const ScoredStep> steps) {
  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(steps.size());
  for (const auto& s : steps) sorted.emplace_back(s.csw, s.event);
  std::sort(sorted.begin(), sorted.end());

  std::vector<std::uint64_t> events_before(sorted.size() + 1, 0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    events_before[i + 1] = events_before[i] + (sorted[i].second ? 1 : 0);
  }
  const std::uint64_t total_events = events_before.back();
  const std::uint64_t total = sorted.size();

  std::vector<double> thresholds{0.0, 1.0};
  for (const auto& s : sorted) thresholds.push_back(s.first);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<PrPoint> curve;
  curve.reserve(thresholds.size());
  for (double rho : thresholds) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), rho,
                                     [](const auto& s, double v) { return s.first < v; });
    const auto flagged = static_cast<std::uint64_t>(it - sorted.begin());
    PrPoint p;
    p.threshold = rho;
    p.counts.tp = events_before[flagged];
    p.counts.fp = flagged - p.counts.tp;
    p.counts.fn = total_events - p.counts.tp;
    p.counts.tn = total - flagged - p.counts.fn;
    curve.push_back(p);
  }
  return curve;
}

double auprc(std::span<const PrPoint> curve) {
  if (curve.empty() || curve.front().counts.positives() == 0) throw NoPositiveEvents();
  double area = 0.0;
  bool started = false;
  double prev_recall = 0.0;
  double prev_precision = 0.0;
  for (const auto& p : curve) {
    if (p.counts.tp + p.counts.fp == 0) continue;
    const double r = p.recall();
    const double pr = p.precision();
    if (!started) {
      prev_precision = pr;
      started = true;
    }
    area += (r - prev_recall) * (pr + prev_precision) / 2.0;
    prev_recall = r;
    prev_precision = pr;
  }
  return std::clamp(area, 0.0, 1.0);
}

namespace {

void check_scored(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
}

// Thresholds in descending order with cumulative (tp, fp) after admitting
// every score >= threshold.
struct Sweep {
  std::vector<double> thresholds;
  std::vector<std::uint64_t> tp;
  std::vector<std::uint64_t> fp;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

Sweep sweep_descending(std::span<const double> scores, const std::vector<bool>& positive) {
  check_scored(scores, positive);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  Sweep s;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double value = scores[order[k]];
    while (k < order.size() && scores[order[k]] == value) {
      (positive[order[k]] ? tp : fp)++;
      ++k;
    }
    s.thresholds.push_back(value);
    s.tp.push_back(tp);
    s.fp.push_back(fp);
  }
  s.positives = tp;
  s.negatives = fp;
  return s;
}

}  // namespace

std::vector<PrPoint> score_pr_curve(std::span<const double> scores,
                                    const std::vector<bool>& positive) {
  const Sweep s = sweep_descending(scores, positive);
  std::vector<PrPoint> curve;
  curve.reserve(s.thresholds.size());
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    PrPoint p;
    p.threshold = s.thresholds[i];
    p.counts.tp = s.tp[i];
    p.counts.fp = s.fp[i];
    p.counts.fn = s.positives - s.tp[i];
    p.counts.tn = s.negatives - s.fp[i];
    curve.push_back(p);
  }
  return curve;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                const std::vector<bool>& positive) {
  const Sweep s = sweep_descending(scores, positive);
  if (s.positives == 0 || s.negatives == 0) {
    throw std::invalid_argument("ROC needs both positive and negative examples");
  }
  std::vector<RocPoint> curve{{0.0, 0.0}};
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    curve.push_back({static_cast<double>(s.fp[i]) / static_cast<double>(s.negatives),
                     static_cast<double>(s.tp[i]) / static_cast<double>(s.positives)});
  }
  return curve;
}

double trapezoid_auc(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

double auroc(std::span<const double> scores, const std::vector<bool>& positive) {
  check_scored(scores, positive);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U statistic, kept integral.
  std::uint64_t twice_wins = 0;
  std::uint64_t negatives_below = 0;
  std::uint64_t positives = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double value = scores[order[k]];
    std::uint64_t gp = 0;
    std::uint64_t gn = 0;
    while (k < order.size() && scores[order[k]] == value) {
      (positive[order[k]] ? gp : gn)++;
      ++k;
    }
    twice_wins += gp * (2 * negatives_below + gn);
    negatives_below += gn;
    positives += gp;
  }
  if (positives == 0 || negatives_below == 0) {
    throw std::invalid_argument("AUROC needs both positive and negative examples");
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives_below));
}

double brier(std::span<const std::vector<double>> posteriors, std::span<const Label> labels) {
  if (posteriors.size() != labels.size() || posteriors.empty()) {
    throw std::invalid_argument("brier: need equal, nonempty series");
  }
  double total = 0.0;
  for (std::size_t n = 0; n < posteriors.size(); ++n) {
    const auto& p = posteriors[n];
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= p.size()) {
      throw std::invalid_argument("brier: label out of range");
    }
    double s = 0.0;
    for (std::size_t l = 0; l < p.size(); ++l) {
      const double d = p[l] - (static_cast<Label>(l) == labels[n] ? 1.0 : 0.0);
      s += d * d;
    }
    total += s;
  }
  return total / static_cast<double>(posteriors.size());
}

double nll(std::span<const std::vector<double>> posteriors, std::span<const Label> labels) {
  if (posteriors.size() != labels.size() || posteriors.empty()) {
    throw std::invalid_argument("nll: need equal, nonempty series");
  }
  double total = 0.0;
  for (std::size_t n = 0; n < posteriors.size(); ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= posteriors[n].size()) {
      throw std::invalid_argument("nll: label out of range");
    }
    total += std::log(std::max(posteriors[n][static_cast<std::size_t>(labels[n])], 1e-12));
  }
  return -total / static_cast<double>(posteriors.size());
}

double ece(std::span<const double> confidences, const std::vector<bool>& correct,
           std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("ece: bins must be >= 1");
  if (confidences.size() != correct.size()) throw std::invalid_argument("ece: length mismatch");
  if (confidences.empty()) return 0.0;
  const double m = static_cast<double>(bins);
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<double> hit_sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    long b = static_cast<long>(std::ceil(c * m)) - 1;
    b = std::clamp<long>(b, 0, static_cast<long>(bins) - 1);
    // Pin the edges to the (b/M, (b+1)/M] convention exactly.
    while (b > 0 && c <= static_cast<double>(b) / m) --b;
    while (b + 1 < static_cast<long>(bins) && c > static_cast<double>(b + 1) / m) ++b;
    conf_sum[b] += c;
    hit_sum[b] += correct[i] ? 1.0 : 0.0;
    ++count[b];
  }
  const double n = static_cast<double>(confidences.size());
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double k = static_cast<double>(count[b]);
    total += (k / n) * std::abs(hit_sum[b] / k - conf_sum[b] / k);
  }
  return total;
}

double exceedance_deviation(std::span<const double> scores, std::span<const double> quantiles,
                            double alpha) {
  if (scores.empty()) throw std::invalid_argument("exceedance: empty series");
  if (scores.size() != quantiles.size()) throw std::invalid_argument("exceedance: misaligned");
  std::size_t exceed = 0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (scores[t] >= quantiles[t]) ++exceed;
  }
  return std::abs(static_cast<double>(exceed) / static_cast<double>(scores.size()) - alpha);
}

BudgetAdherence budget_adherence(std::span<const Decision> decisions, double budget,
                                 std::size_t burst_window) {
  if (decisions.empty()) throw std::invalid_argument("budget adherence: no decisions");
  if (burst_window == 0) throw std::invalid_argument("burst window must be positive");
  std::size_t total = 0;
  for (const auto& d : decisions) total += d.abstained() ? 1 : 0;
  BudgetAdherence out;
  out.longrun =
      std::abs(static_cast<double>(total) / static_cast<double>(decisions.size()) - budget);

  const std::size_t w = std::min(burst_window, decisions.size());
  std::size_t in_window = 0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    in_window += decisions[i].abstained() ? 1 : 0;
    if (i >= w) in_window -= decisions[i - w].abstained() ? 1 : 0;
    if (i + 1 >= w) worst = std::max(worst, in_window);
  }
  out.worst_window = static_cast<double>(worst) / static_cast<double>(w);
  return out;
}

std::optional<double> median_detection_delay(std::span<const ScoredStep> steps, double rho) {
  std::vector<double> delays;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const bool onset = steps[i].event &&
                       (i == 0 || !steps[i - 1].event || steps[i - 1].index + 1 != steps[i].index);
    if (!onset) continue;
    for (std::size_t j = i; j < steps.size() && steps[j].event; ++j) {
      if (j > i && steps[j - 1].index + 1 != steps[j].index) break;
      if (steps[j].csw < rho) {
        delays.push_back(static_cast<double>(steps[j].index - steps[i].index));
        break;
      }
    }
  }
  if (delays.empty()) return std::nullopt;
  std::sort(delays.begin(), delays.end());
  const std::size_t mid = delays.size() / 2;
  return delays.size() % 2 == 1 ? delays[mid] : 0.5 * (delays[mid - 1] + delays[mid]);
}

double best_f1_threshold(std::span<const PrPoint> curve) {
  if (curve.empty()) throw std::invalid_argument("empty PR curve");
  double best = -1.0;
  double threshold = curve.front().threshold;
  for (const auto& p : curve) {
    const double denom = static_cast<double>(2 * p.counts.tp + p.counts.fp + p.counts.fn);
    const double f1 = denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(p.counts.tp) / denom;
    if (f1 > best) {
      best = f1;
      threshold = p.threshold;
    }
  }
  return threshold;
}

void MetricsReport::add(const std::string& name, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  lines_.emplace_back(name, buf);
}

void MetricsReport::add_count(const std::string& name, std::uint64_t value) {
  lines_.emplace_back(name, std::to_string(value));
}

void MetricsReport::skip(const std::string& name, const std::string& reason) {
  lines_.emplace_back(name, "skipped: " + reason);
}

std::string MetricsReport::str() const {
  std::string out;
  for (const auto& [name, value] : lines_) {
    out += name;
    out += ' ';
    out += value;
    out += '\n';
  }
  return out;
}

}  // namespace tempconf
