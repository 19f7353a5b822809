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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "event_fixture.hpp"
#include "oracles.hpp"
#include "tempconf/conformal.hpp"
#include "tempconf/evaluation.hpp"
#include "tempconf/fitting.hpp"
#include "tempconf/monitor.hpp"
#include "tempconf/quantized.hpp"
#include "tempconf/signals.hpp"
#include "tempconf/streamgen.hpp"

using namespace tempconf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Fitted once and shared by the stream-level criteria.
const CombinerParams& fitted_params() {
  static const CombinerParams params = [] {
    const auto dev = generate(dev_mixture(20000, 1), GeneratorModel{});
    const MonitorConfig cfg;
    const auto examples = collect_dev_examples(dev, cfg.window, cfg.signals);
    return fit_combiner(examples, FitConfig{});
  }();
  return params;
}

struct Trace {
  std::vector<double> score;
  std::vector<double> quantile;
  std::vector<Decision> decisions;
  std::vector<SignalVector> signals;
};

Trace run_monitor(const MonitorConfig& cfg, const std::vector<StreamRecord>& recs,
                  bool quantized, const GeneratorModel& model = {}) {
  Monitor mon(cfg, fitted_params(), model.classes, model.feature_dim, quantized);
  Trace t;
  for (const auto& r : recs) {
    const auto s = mon.step(r.posterior, r.feature);
    t.score.push_back(s.decision.score);
    t.quantile.push_back(s.decision.quantile);
    t.decisions.push_back(s.decision);
    t.signals.push_back(s.signals);
  }
  return t;
}

// 1. Exceedance deviation on a stationary ID stream.
Verdict streaming_calibration() {
  Verdict v;
  const auto start = Clock::now();
  const MonitorConfig base;
  const auto recs = generate(
      std::vector<SegmentSpec>{{SegmentKind::kID, 10000 + base.calib.warmup_steps, 0, 11}},
      GeneratorModel{});
  for (double alpha : {0.05, 0.10, 0.20}) {
    MonitorConfig cfg = base;
    cfg.calib.risk_level = alpha;
    const auto t = run_monitor(cfg, recs, false);
    const std::size_t w = cfg.calib.warmup_steps;
    const std::vector<double> r(t.score.begin() + w, t.score.end());
    const std::vector<double> q(t.quantile.begin() + w, t.quantile.end());
    const double dev = exceedance_deviation(r, q, alpha);
    v.detail << " dev(" << alpha << ")=" << fmt(dev);
    v.require(dev <= 0.02, "deviation <= 0.02 at alpha " + fmt(alpha));
  }
  const double secs = seconds_since(start);
  v.detail << " time=" << fmt(secs, 3) << "s";
  v.require(secs < 5.0, "runtime < 5 s");
  return v;
}

// 2. Budget adherence and burst responsiveness under constant maximal scores.
Verdict budget_adherence_check() {
  Verdict v;
  const auto start = Clock::now();
  CalibConfig cfg;
  cfg.budget = 0.15;
  ConformalGate gate(cfg);
  std::vector<Decision> live;
  for (std::size_t i = 0; i < cfg.warmup_steps + 10000; ++i) {
    const Decision d = gate.step(1.0, 0);
    if (!d.warmup) live.push_back(d);
  }
  std::size_t above = 0;
  std::size_t abstained = 0;
  for (const auto& d : live) {
    above += d.score >= d.quantile ? 1 : 0;
    abstained += d.abstained() ? 1 : 0;
  }
  const double rate = double(abstained) / double(live.size());
  v.detail << " steps=" << live.size() << " r>=q on " << above << " b_hat=" << fmt(rate);
  v.require(above == live.size(), "every score reaches the quantile");
  v.require(std::abs(rate - cfg.budget) <= 0.02, "|b_hat - b| <= 0.02");

  // Every 50-step window with all scores at or above q holds an abstention.
  std::size_t bad_windows = 0;
  std::size_t run_above = 0;
  std::size_t recent = 0;
  for (std::size_t i = 0; i < live.size(); ++i) {
    run_above = live[i].score >= live[i].quantile ? run_above + 1 : 0;
    recent += live[i].abstained() ? 1 : 0;
    if (i >= 50) recent -= live[i - 50].abstained() ? 1 : 0;
    if (i + 1 >= 50 && run_above >= 50 && recent == 0) ++bad_windows;
  }
  v.detail << " silent_windows=" << bad_windows;
  v.require(bad_windows == 0, "burst responsiveness");
  const auto adherence = budget_adherence(live, cfg.budget, cfg.burst_window);
  v.require(adherence.longrun <= 0.02, "budget_adherence long-run <= 0.02");
  const double secs = seconds_since(start);
  v.detail << " time=" << fmt(secs, 3) << "s";
  v.require(secs < 5.0, "runtime < 5 s");
  return v;
}

// 3. Drop-detection AUPRC of 1 - r against max probability, severities 1..5.
Verdict detection_superiority() {
  Verdict v;
  const auto start = Clock::now();
  constexpr std::size_t kReplicas = 20;
  constexpr std::size_t kSegment = 2000;
  constexpr std::size_t kM = 100;
  const MonitorConfig cfg;
  const GeneratorModel model;
  std::vector<double> monitor_auprc;
  double margin_sum = 0.0;
  for (int severity = 1; severity <= 5; ++severity) {
    std::vector<ScoredStep> pooled_t;
    std::vector<ScoredStep> pooled_b;
    for (std::size_t rep = 0; rep < kReplicas; ++rep) {
      const std::uint64_t seed = 100000 + std::uint64_t(severity) * 1000 + rep * 2;
      const std::vector<SegmentSpec> spec{{SegmentKind::kID, kSegment, 0, seed},
                                          {SegmentKind::kCID, kSegment, severity, seed + 1}};
      const auto recs = generate(spec, model);
      const auto trace = run_monitor(cfg, recs, false, model);
      const auto outcomes = outcomes_of(recs);
      const IDBand band = id_band(std::span(outcomes).first(kSegment), kM);
      std::vector<double> monitor(recs.size());
      std::vector<double> maxprob(recs.size());
      for (std::size_t i = 0; i < recs.size(); ++i) {
        monitor[i] = 1.0 - trace.score[i];
        maxprob[i] = max_confidence(recs[i].posterior);
      }
      const auto st = drop_detection_steps(outcomes, band, kM, monitor);
      const auto sb = drop_detection_steps(outcomes, band, kM, maxprob);
      pooled_t.insert(pooled_t.end(), st.begin(), st.end());
      pooled_b.insert(pooled_b.end(), sb.begin(), sb.end());
    }
    const double at = auprc(drop_pr_curve(pooled_t));
    const double ab = auprc(drop_pr_curve(pooled_b));
    monitor_auprc.push_back(at);
    margin_sum += at - ab;
    v.detail << " s" << severity << "=" << fmt(at) << "/" << fmt(ab);
  }
  const double margin = margin_sum / 5.0;
  v.detail << " mean_margin=" << fmt(margin);
  v.require(margin >= 0.03, "mean margin >= 0.03");
  for (std::size_t i = 1; i < monitor_auprc.size(); ++i) {
    v.require(monitor_auprc[i] >= monitor_auprc[i - 1],
              "monotone at severity " + std::to_string(i + 1));
  }
  const double secs = seconds_since(start);
  v.detail << " time=" << fmt(secs, 3) << "s";
  v.require(secs < 60.0, "runtime < 60 s");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

// 4. Quantized kernels against the float path.
Verdict quantized_parity() {
  Verdict v;
  const GeneratorModel model;
  const std::vector<SegmentSpec> spec{{SegmentKind::kID, 2000, 0, 41},
                                      {SegmentKind::kCID, 1000, 2, 42},
                                      {SegmentKind::kCID, 1000, 5, 43},
                                      {SegmentKind::kOOD, 1000, 0, 44}};
  const auto recs = generate(spec, model);
  const LogLUT lut;
  const double eps = SignalConfig{}.epsilon;
  double worst = 0.0;
  double worst_dequantized = 0.0;
  std::size_t pairs = 0;
  for (std::size_t t = 1; t < recs.size(); ++t) {
    const auto qt = quantize_posterior(recs[t].posterior);
    const auto qp = quantize_posterior(recs[t - 1].posterior);
    const double jq = jsd_quantized(qt, qp, lut, eps);
    worst = std::max(worst, std::abs(jq - jsd(recs[t].posterior, recs[t - 1].posterior, eps)));
    worst_dequantized =
        std::max(worst_dequantized, std::abs(jq - oracle::jsd(dequantize(qt), dequantize(qp), eps)));
    ++pairs;
  }
  v.detail << " pairs=" << pairs << " max|jsd_q-jsd_float|=" << fmt(worst)
           << " (vs dequantized inputs " << fmt(worst_dequantized) << ")";
  v.require(worst <= 0.01, "jsd deviation <= 0.01");

  const MonitorConfig cfg;
  const auto f = run_monitor(cfg, recs, false, model);
  const auto q = run_monitor(cfg, recs, true, model);
  std::size_t agree = 0;
  double worst_r = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    agree += f.decisions[i].kind == q.decisions[i].kind ? 1 : 0;
    worst_r = std::max(worst_r, std::abs(f.score[i] - q.score[i]));
  }
  const double agreement = double(agree) / double(recs.size());
  v.detail << " agreement=" << fmt(agreement) << " max|dr|=" << fmt(worst_r);
  v.require(agreement >= 0.99, "decision agreement >= 99%");

  const std::regex transcendental(R"(\b(std::)?(log|exp|pow|log2|log10|log1p|expm1)\s*\()");
  std::size_t calls = 0;
  for (const char* name : {"quantized_kernels.cpp", "quantized_window.cpp"}) {
    const std::string text = read_file(std::string(TEMPCONF_CORE_SOURCE_DIR) + "/" + name);
    v.require(!text.empty(), std::string("read ") + name);
    calls += std::distance(std::sregex_iterator(text.begin(), text.end(), transcendental),
                           std::sregex_iterator());
  }
  v.detail << " transcendental_calls=" << calls;
  v.require(calls == 0, "no transcendental calls");
  return v;
}

// 5. Constant state size and flat per-step cost.
Verdict constant_resources() {
  Verdict v;
  const GeneratorModel model;
  const auto recs = generate(dev_mixture(100000, 51), model);
  const MonitorConfig cfg;
  for (bool quantized : {false, true}) {
    Monitor a(cfg, fitted_params(), model.classes, model.feature_dim, quantized);
    Monitor fresh(cfg, fitted_params(), model.classes, model.feature_dim, quantized);
    for (std::size_t i = 0; i < cfg.calib.warmup_steps; ++i) a.step(recs[i].posterior, recs[i].feature);
    const std::size_t after_warmup = a.state_bytes();
    for (std::size_t i = cfg.calib.warmup_steps; i < recs.size(); ++i) {
      a.step(recs[i].posterior, recs[i].feature);
    }
    v.require(a.state_bytes() == after_warmup, "state constant over 100k steps");
    v.detail << (quantized ? " quantized" : " float") << "_bytes=" << a.state_bytes();
    // Same shape, different history.
    for (std::size_t i = 0; i < cfg.calib.warmup_steps + 10; ++i) {
      fresh.step(recs[recs.size() - 1 - i].posterior, recs[recs.size() - 1 - i].feature);
    }
    v.require(fresh.state_bytes() == after_warmup, "state depends only on shape");
  }

  // Best of several runs for each 10k block.
  constexpr std::size_t kBlock = 10000;
  double first = 1e300;
  double last = 1e300;
  for (int trial = 0; trial < 5; ++trial) {
    Monitor m(cfg, fitted_params(), model.classes, model.feature_dim);
    auto t0 = Clock::now();
    for (std::size_t i = 0; i < kBlock; ++i) m.step(recs[i].posterior, recs[i].feature);
    const double a = seconds_since(t0);
    for (std::size_t i = kBlock; i < recs.size() - kBlock; ++i) {
      m.step(recs[i].posterior, recs[i].feature);
    }
    t0 = Clock::now();
    for (std::size_t i = recs.size() - kBlock; i < recs.size(); ++i) {
      m.step(recs[i].posterior, recs[i].feature);
    }
    const double b = seconds_since(t0);
    if (trial > 0) {
      first = std::min(first, a);
      last = std::min(last, b);
    }
  }
  const double ratio = last / first;
  v.detail << " first10k=" << fmt(first * 1e2, 3) << "us/step last10k=" << fmt(last * 1e2, 3)
           << "us/step ratio=" << fmt(ratio, 3);
  v.require(std::abs(ratio - 1.0) <= 0.2, "last block within 20% of first");
  return v;
}

// 6. Metrics against brute-force oracles, exact equality.
Verdict metric_oracles() {
  Verdict v;
  std::mt19937_64 rng(61);
  std::size_t mismatches = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 2 + rng() % 199;
    const std::size_t L = 2 + rng() % 9;
    std::vector<double> scores(n);
    std::vector<bool> positive(n);
    std::vector<std::vector<double>> posteriors(n);
    std::vector<Label> labels(n);
    std::vector<int> labels_int(n);
    std::vector<double> conf(n);
    std::vector<bool> correct(n);
    const std::uint64_t grid = 1 + rng() % 40;  // coarse grids give ties
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = double(rng() % (grid + 1)) / double(grid);
      positive[i] = (rng() % 3) == 0;
      posteriors[i] = oracle::random_posterior(rng, L, (i % 2) ? 5.0 : 0.0);
      labels[i] = Label(rng() % L);
      labels_int[i] = int(labels[i]);
      conf[i] = max_confidence(posteriors[i]);
      correct[i] = argmax(posteriors[i]) == labels[i];
    }
    positive[0] = true;
    positive[1] = false;
    const std::size_t bins = 1 + rng() % 20;
    mismatches += auroc(scores, positive) != oracle::auroc_pairwise(scores, positive);
    mismatches += auprc(score_pr_curve(scores, positive)) != oracle::auprc_brute(scores, positive);
    mismatches += brier(posteriors, labels) != oracle::brier_direct(posteriors, labels_int);
    mismatches += nll(posteriors, labels) != oracle::nll_direct(posteriors, labels_int);
    mismatches += ece(conf, correct, bins) != oracle::ece_naive(conf, correct, bins);
  }
  v.detail << " instances=100 mismatches=" << mismatches;
  v.require(mismatches == 0, "exact agreement");
  return v;
}

// 7. Combiner recovery, gradient check, monotone objective.
Verdict combiner_fitting() {
  Verdict v;
  const CombinerParams truth{{3.0, 2.0, 1.5, 4.0}, -4.0};
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DevExample> ex;
  for (int i = 0; i < 50000; ++i) {
    const SignalVector s{u(rng) * 0.69, u(rng), u(rng), u(rng)};
    ex.push_back({s, u(rng) < uncertainty_score(s, truth)});
  }
  FitConfig cfg;
  cfg.class_balance = false;
  const auto fit = fit_combiner_detailed(ex, cfg);
  const auto got = CombinerObjective::pack(fit.params);
  const auto want = CombinerObjective::pack(truth);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(got[i] - want[i]) / std::abs(want[i]));
  v.detail << " n=50000 max_rel_err=" << fmt(worst);
  v.require(worst <= 0.15, "recovery within 15%");

  bool monotone = true;
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    monotone = monotone && fit.objective_trace[i] <= fit.objective_trace[i - 1];
  }
  v.detail << " iterations=" << fit.iterations << " monotone=" << (monotone ? "yes" : "no");
  v.require(monotone, "objective non-increasing");

  const CombinerObjective obj(std::span<const DevExample>(ex).first(2000), 1e-3, true);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CombinerObjective::Vec theta;
    for (double& t : theta) t = (u(rng) - 0.5) * 8.0;
    const auto g = obj.gradient(theta);
    for (int i = 0; i < 5; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
      auto hi = theta;
      auto lo = theta;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (obj.value(hi) - obj.value(lo)) / (2.0 * h);
      worst_grad = std::max(worst_grad, std::abs(fd - g[i]) / std::max(std::abs(g[i]), 1e-8));
    }
  }
  v.detail << " grad_rel_err=" << fmt(worst_grad, 3);
  v.require(worst_grad <= 1e-5, "finite differences within 1e-5");
  return v;
}

// 8. Warm-up never abstains; the first signal vector is [0, 0, 0, m_0].
Verdict cold_start() {
  Verdict v;
  const GeneratorModel model;
  std::vector<std::vector<StreamRecord>> streams;
  streams.push_back(generate(std::vector<SegmentSpec>{{SegmentKind::kID, 500, 0, 81}}, model));
  streams.push_back(generate(std::vector<SegmentSpec>{{SegmentKind::kCID, 500, 5, 82}}, model));
  streams.push_back(generate(std::vector<SegmentSpec>{{SegmentKind::kOOD, 500, 0, 83}}, model));
  // Random posteriors with random features.
  std::mt19937_64 rng(84);
  std::normal_distribution<double> n01;
  std::vector<StreamRecord> noise(500);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    noise[i].t = i;
    noise[i].posterior = oracle::random_posterior(rng, model.classes, (i % 7) * 3.0);
    noise[i].feature.resize(model.feature_dim);
    for (double& x : noise[i].feature) x = n01(rng);
  }
  streams.push_back(noise);

  std::size_t warmup_abstentions = 0;
  std::size_t bad_first = 0;
  for (const auto& s : streams) {
    for (bool quantized : {false, true}) {
      for (std::size_t w : {16u, 20u}) {
        MonitorConfig cfg;
        cfg.window = w;
        cfg.calib.warmup_steps = 3 * w;
        const auto t = run_monitor(cfg, s, quantized, model);
        for (std::size_t i = 0; i < cfg.calib.warmup_steps; ++i) {
          warmup_abstentions += t.decisions[i].abstained() ? 1 : 0;
        }
        const SignalVector expect{0.0, 0.0, 0.0,
                                  confidence_proxy(s[0].posterior, cfg.signals.proxy_blend)};
        bad_first += t.signals[0] == expect ? 0 : 1;
      }
    }
  }
  v.detail << " runs=16 warmup_abstentions=" << warmup_abstentions
           << " bad_first_vectors=" << bad_first;
  v.require(warmup_abstentions == 0, "no abstentions during warm-up");
  v.require(bad_first == 0, "s_0 = [0, 0, 0, m_0]");
  return v;
}

// 9. Hand-enumerated event labeling fixture.
Verdict event_labeling() {
  Verdict v;
  std::vector<Outcome> outcomes;
  for (int o : fixture::event_outcomes()) {
    outcomes.push_back(o < 0 ? Outcome::kUnlabeled : o ? Outcome::kCorrect : Outcome::kWrong);
  }
  const auto scores = fixture::event_scores();
  const IDBand band{fixture::kMu, fixture::kSigma};
  std::size_t matched = 0;
  const auto expected = fixture::expected_counts();
  for (const auto& e : expected) {
    const auto c = label_events(outcomes, band, fixture::kWindow, e.rho, scores);
    const auto o = oracle::drop_counts(fixture::event_outcomes(), scores, fixture::kWindow,
                                       band.threshold(), e.rho);
    const bool ok = c == EventCounts{e.tp, e.fp, e.tn, e.fn} && o.tp == e.tp && o.fp == e.fp &&
                    o.tn == e.tn && o.fn == e.fn;
    matched += ok ? 1 : 0;
    if (!ok) {
      v.detail << " rho=" << e.rho << " got " << c.tp << "/" << c.fp << "/" << c.tn << "/" << c.fn;
    }
  }
  v.detail << " thresholds=" << expected.size() << " matched=" << matched;
  v.require(matched == expected.size(), "all counts match");
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"streaming calibration", streaming_calibration},
      {"budget adherence", budget_adherence_check},
      {"detection superiority", detection_superiority},
      {"quantized parity", quantized_parity},
      {"constant resources", constant_resources},
      {"metric oracles", metric_oracles},
      {"combiner fitting", combiner_fitting},
      {"cold-start safety", cold_start},
      {"event labeling", event_labeling},
  };
  fitted_params();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " exception: " << e.what();
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s%s\n", i + 1, criteria[i].name, v.pass ? "PASS" : "FAIL",
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
