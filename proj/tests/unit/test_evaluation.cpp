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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "event_fixture.hpp"
#include "oracles.hpp"
#include "tempconf/evaluation.hpp"

using namespace tempconf;

namespace {

std::vector<Outcome> to_outcomes(const std::vector<int>& o) {
  std::vector<Outcome> out;
  for (int v : o) out.push_back(v < 0 ? Outcome::kUnlabeled : v ? Outcome::kCorrect : Outcome::kWrong);
  return out;
}

// Scores on a 1/64 grid so every moving sum is exact.
std::vector<double> grid_scores(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> s(n);
  for (double& v : s) v = static_cast<double>(rng() % 65) / 64.0;
  return s;
}

}  // namespace

TEST(Outcomes, FromRecords) {
  std::vector<StreamRecord> recs(4);
  for (auto& r : recs) r.posterior = {0.7, 0.3};
  recs[0].label = 0;
  recs[1].label = 1;
  recs[2].label = kOodLabel;
  const auto o = outcomes_of(recs);
  EXPECT_EQ(o[0], Outcome::kCorrect);
  EXPECT_EQ(o[1], Outcome::kWrong);
  EXPECT_EQ(o[2], Outcome::kUnlabeled);
  EXPECT_EQ(o[3], Outcome::kUnlabeled);
}

TEST(SlidingAccuracy, MatchesOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> o(300);
    for (int& v : o) v = static_cast<int>(rng() % 3) - 1;
    const std::size_t m = 1 + rng() % 40;
    const auto got = sliding_accuracy(to_outcomes(o), m);
    const auto want = oracle::asw(o, m);
    for (std::size_t i = 0; i < o.size(); ++i) {
      ASSERT_EQ(got[i].has_value(), want[i].has_value());
      if (got[i]) {
        ASSERT_EQ(*got[i], *want[i]);
      }
    }
  }
}

TEST(SlidingMean, MatchesOracleOnExactGrid) {
  std::mt19937_64 rng(2);
  const auto s = grid_scores(rng, 500);
  EXPECT_EQ(sliding_mean(s, 37), oracle::csw(s, 37));
  EXPECT_THROW(sliding_mean(s, 0), std::invalid_argument);
}

TEST(IdBand, MeanAndPopulationStd) {
  // ASW over m = 2 from step 2 on: pattern gives values 1, 0.5, 0.5, 1, ...
  std::vector<int> o{1, 1, 1, 0, 1, 1, 0, 1, 1, 0};
  const IDBand band = id_band(to_outcomes(o), 2);
  const auto a = oracle::asw(o, 2);
  double mu = 0, n = 0;
  for (std::size_t i = 2; i < a.size(); ++i) mu += *a[i], ++n;
  mu /= n;
  double var = 0;
  for (std::size_t i = 2; i < a.size(); ++i) var += (*a[i] - mu) * (*a[i] - mu);
  EXPECT_DOUBLE_EQ(band.mu, mu);
  EXPECT_DOUBLE_EQ(band.sigma, std::sqrt(var / n));
  EXPECT_DOUBLE_EQ(band.threshold(), mu - 3 * band.sigma);
  EXPECT_THROW(id_band(to_outcomes({1, 1}), 2), std::invalid_argument);
}

TEST(EventLabeling, HandEnumeratedFixture) {
  const auto o = to_outcomes(fixture::event_outcomes());
  const auto s = fixture::event_scores();
  const IDBand band{fixture::kMu, fixture::kSigma};
  for (const auto& e : fixture::expected_counts()) {
    const EventCounts c = label_events(o, band, fixture::kWindow, e.rho, s);
    EXPECT_EQ(c.tp, e.tp) << "rho " << e.rho;
    EXPECT_EQ(c.fp, e.fp) << "rho " << e.rho;
    EXPECT_EQ(c.tn, e.tn) << "rho " << e.rho;
    EXPECT_EQ(c.fn, e.fn) << "rho " << e.rho;
    EXPECT_EQ(c.total(), 380u);
  }
}

TEST(EventLabeling, RandomStreamsMatchOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<int> o(400);
    const double p_wrong = 0.05 + 0.4 * (trial % 5) / 4.0;
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double x = static_cast<double>(rng() % 1000) / 1000.0;
      o[i] = (rng() % 10 == 0) ? -1 : (x < (i > 200 ? p_wrong : 0.05) ? 0 : 1);
    }
    const auto s = grid_scores(rng, o.size());
    const std::size_t m = 5 + rng() % 30;
    const IDBand band{0.9, 0.05};
    for (double rho : {0.0, 0.3, 0.5, 0.75, 1.0}) {
      const auto c = label_events(to_outcomes(o), band, m, rho, s);
      const auto w = oracle::drop_counts(o, s, m, band.threshold(), rho);
      ASSERT_EQ(c.tp, w.tp);
      ASSERT_EQ(c.fp, w.fp);
      ASSERT_EQ(c.tn, w.tn);
      ASSERT_EQ(c.fn, w.fn);
    }
  }
}

TEST(DropPrCurve, AuprcMatchesBruteForce) {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<int> o(300);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (rng() % 100) < (i > 150 ? 40u : 8u) ? 0 : 1;
    const auto s = grid_scores(rng, o.size());
    const IDBand band{0.92, 0.03};
    const auto steps = drop_detection_steps(to_outcomes(o), band, 20, s);
    std::uint64_t events = 0;
    for (const auto& x : steps) events += x.event;
    if (events == 0) {
      EXPECT_THROW(auprc(drop_pr_curve(steps)), NoPositiveEvents);
      continue;
    }
    ++checked;
    ASSERT_EQ(auprc(drop_pr_curve(steps)), oracle::drop_auprc_brute(o, s, 20, band.threshold()));
  }
  EXPECT_GT(checked, 30);
}

TEST(DropPrCurve, NoEventsReportsError) {
  const std::vector<int> o(200, 1);
  std::vector<double> s(200, 0.9);
  const auto steps = drop_detection_steps(to_outcomes(o), IDBand{1.0, 0.0 + 0.01}, 20, s);
  try {
    auprc(drop_pr_curve(steps));
    FAIL();
  } catch (const NoPositiveEvents& e) {
    EXPECT_STREQ(e.what(), "no drop events to detect");
  }
}

TEST(ScoreMetrics, AurocAndAuprcMatchBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    std::vector<double> s(n);
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = rng() % 3 == 0;
      s[i] = (trial % 2) ? static_cast<double>(rng() % 10) / 10.0 : (rng() % 100000) / 1e5;
    }
    pos[0] = true;
    pos[1] = false;
    ASSERT_EQ(auroc(s, pos), oracle::auroc_pairwise(s, pos));
    ASSERT_EQ(auprc(score_pr_curve(s, pos)), oracle::auprc_brute(s, pos));
    ASSERT_NEAR(trapezoid_auc(roc_curve(s, pos)), auroc(s, pos), 1e-12);
  }
}

TEST(ScoreMetrics, Examples) {
  const std::vector<double> s{0.9, 0.8, 0.3, 0.1};
  EXPECT_DOUBLE_EQ(auroc(s, {true, true, false, false}), 1.0);
  EXPECT_DOUBLE_EQ(auroc(s, {false, false, true, true}), 0.0);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.5, 0.5}, {true, false}), 0.5);
  EXPECT_DOUBLE_EQ(auprc(score_pr_curve(s, {true, true, false, false})), 1.0);
  EXPECT_THROW(auroc(s, {true, true, true, true}), std::invalid_argument);
}

TEST(ProperScores, MatchDirectSummation) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const std::size_t L = 2 + rng() % 10;
    std::vector<std::vector<double>> p;
    std::vector<Label> y;
    std::vector<int> yi;
    std::vector<double> conf;
    std::vector<bool> correct;
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back(oracle::random_posterior(rng, L, (i % 2) ? 5.0 : 0.0));
      yi.push_back(static_cast<int>(rng() % L));
      y.push_back(yi.back());
      conf.push_back(*std::max_element(p.back().begin(), p.back().end()));
      correct.push_back(rng() % 2 == 0);
    }
    ASSERT_EQ(brier(p, y), oracle::brier_direct(p, yi));
    ASSERT_EQ(nll(p, y), oracle::nll_direct(p, yi));
    const std::size_t bins = 1 + rng() % 20;
    ASSERT_EQ(ece(conf, correct, bins), oracle::ece_naive(conf, correct, bins));
  }
}

TEST(ProperScores, Examples) {
  const std::vector<std::vector<double>> onehot{{1, 0}, {0, 1}};
  EXPECT_DOUBLE_EQ(brier(onehot, std::vector<Label>{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(brier(onehot, std::vector<Label>{1, 0}), 2.0);
  EXPECT_NEAR(nll(onehot, std::vector<Label>{1, 0}), -std::log(1e-12), 1e-9);
  // Edge confidences sit in the lower bin: 0.5 -> (0.25, 0.5] with 4 bins.
  EXPECT_DOUBLE_EQ(ece(std::vector<double>{0.5, 1.0}, {false, true}, 4), 0.25);
  EXPECT_DOUBLE_EQ(ece(std::vector<double>{}, {}, 4), 0.0);
  EXPECT_THROW(brier(onehot, std::vector<Label>{0, 2}), std::invalid_argument);
}

TEST(Exceedance, Deviation) {
  const std::vector<double> r{0.1, 0.5, 0.9, 0.95};
  const std::vector<double> q{0.5, 0.5, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(exceedance_deviation(r, q, 0.1), 0.4);
  EXPECT_THROW(exceedance_deviation(r, std::vector<double>{0.5}, 0.1), std::invalid_argument);
}

TEST(BudgetAdherenceMetric, LongRunAndWorstWindow) {
  std::vector<Decision> d(100);
  for (int i = 0; i < 10; ++i) d[i].kind = DecisionKind::kAbstain;
  const auto a = budget_adherence(d, 0.15, 20);
  EXPECT_NEAR(a.longrun, 0.05, 1e-15);
  EXPECT_DOUBLE_EQ(a.worst_window, 0.5);
}

TEST(DetectionDelay, MedianOverOnsets) {
  // Two event runs; the first is alarmed 2 steps after onset, the second at onset.
  std::vector<ScoredStep> steps;
  for (std::size_t i = 0; i < 30; ++i) {
    const bool event = (i >= 5 && i < 12) || (i >= 20 && i < 25);
    const double csw = (i >= 7 && i < 12) || (i >= 20 && i < 22) ? 0.1 : 0.9;
    steps.push_back({i, csw, event});
  }
  const auto delay = median_detection_delay(steps, 0.5);
  ASSERT_TRUE(delay.has_value());
  EXPECT_DOUBLE_EQ(*delay, 1.0);
  EXPECT_FALSE(median_detection_delay(steps, 0.05).has_value());
}

TEST(BestF1, PicksHighestF1) {
  const auto o = to_outcomes(fixture::event_outcomes());
  const auto steps = drop_detection_steps(o, IDBand{fixture::kMu, fixture::kSigma},
                                          fixture::kWindow, fixture::event_scores());
  const auto curve = drop_pr_curve(steps);
  auto f1 = [](const EventCounts& c) {
    return 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn);
  };
  const double best = f1(count_events(steps, best_f1_threshold(curve)));
  for (const auto& p : curve) ASSERT_LE(f1(p.counts), best);
  EXPECT_GT(best, 0.97);
}

TEST(MetricsReport, FormatsLines) {
  MetricsReport r;
  r.add("auroc", 0.5);
  r.add_count("steps", 10);
  r.skip("brier", "unlabeled");
  EXPECT_EQ(r.str(), "auroc 0.5\nsteps 10\nbrier skipped: unlabeled\n");
}
