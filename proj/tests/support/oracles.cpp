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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace oracle {

double jsd(const std::vector<double>& p, const std::vector<double>& q, double eps) {
  const double L = static_cast<double>(p.size());
  double kl_a = 0.0;
  double kl_b = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = (p[i] + eps) / (1.0 + L * eps);
    const double b = (q[i] + eps) / (1.0 + L * eps);
    const double m = 0.5 * (a + b);
    if (a > 0) kl_a += a * std::log(a / m);
    if (b > 0) kl_b += b * std::log(b / m);
  }
  return 0.5 * kl_a + 0.5 * kl_b;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double divergence(const ListWindow& w, const std::vector<double>& p,
                  const std::vector<std::size_t>& lags, const std::vector<double>& weights,
                  double eps) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!w.has(lags[i])) continue;
    num += weights[i] * jsd(p, w.at(lags[i]).posterior, eps);
    den += weights[i];
  }
  return den == 0.0 ? 0.0 : num / den;
}

double stability(const ListWindow& w, const std::vector<double>& f,
                 const std::vector<std::size_t>& lags) {
  double sum = 0.0;
  int k = 0;
  for (std::size_t lag : lags) {
    if (!w.has(lag)) continue;
    sum += cosine(f, w.at(lag).feature);
    ++k;
  }
  return k == 0 ? 1.0 : sum / k;
}

double persistence(const ListWindow& w, int label, const std::vector<std::size_t>& lags) {
  int k = 0;
  int same = 0;
  for (std::size_t lag : lags) {
    if (!w.has(lag)) continue;
    ++k;
    same += w.at(lag).label == label ? 1 : 0;
  }
  return k == 0 ? 1.0 : static_cast<double>(same) / k;
}

double proxy(const std::vector<double>& p, double blend) {
  std::vector<double> s = p;
  std::sort(s.rbegin(), s.rend());
  return blend * (1.0 - s[0]) + (1.0 - blend) * (1.0 - (s[0] - s[1]));
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double nearest_rank(std::vector<double> values, std::uint64_t num, std::uint64_t den) {
  std::sort(values.begin(), values.end());
  const std::uint64_t n = values.size();
  std::uint64_t k = (n * (den - num) + den - 1) / den;
  if (k == 0) k = 1;
  return values[k - 1];
}

GateTrace replay_gate(const std::vector<double>& scores, double alpha, double eta,
                      std::size_t warmup, double budget, std::size_t burst) {
  // alpha is expected to be a decimal with an exact denominator of 100.
  const auto num = static_cast<std::uint64_t>(std::llround(alpha * 100.0));
  GateTrace out;
  std::vector<bool> live_abstain;  // post-warm-up decisions only
  double q = 0.0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (t > 0 && t <= warmup) {
      q = nearest_rank(std::vector<double>(scores.begin(), scores.begin() + t), num, 100);
    } else if (t > warmup) {
      const double r = scores[t - 1];
      q = std::clamp(q + eta * ((r > q ? 1.0 : 0.0) - alpha), 0.0, 1.0);
    }
    const bool warm = t < warmup;
    bool abstain = false;
    if (!warm && scores[t] >= q) {
      std::uint64_t a = 0;
      for (bool x : live_abstain) a += x ? 1 : 0;
      const double next = static_cast<double>(a + 1) /
                          static_cast<double>(live_abstain.size() + 1);
      bool recent = false;
      const std::size_t from = live_abstain.size() > burst ? live_abstain.size() - burst : 0;
      for (std::size_t i = from; i < live_abstain.size(); ++i) recent = recent || live_abstain[i];
      abstain = next <= budget || !recent;
    }
    if (!warm) live_abstain.push_back(abstain);
    out.abstain.push_back(abstain);
    out.warmup.push_back(warm);
    out.quantile.push_back(q);
  }
  return out;
}

double auroc_pairwise(const std::vector<double>& s, const std::vector<bool>& pos) {
  std::uint64_t twice = 0, P = 0, N = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (pos[i]) ++P; else ++N;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (pos[j]) continue;
      if (s[i] > s[j]) twice += 2;
      else if (s[i] == s[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
}

namespace {

double trapezoid_pr(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& tp_fp,
                    std::uint64_t P) {
  double area = 0.0, prev_r = 0.0, prev_p = 0.0;
  bool first = true;
  for (auto [tp, fp] : tp_fp) {
    if (tp + fp == 0) continue;
    const double r = static_cast<double>(tp) / static_cast<double>(P);
    const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (first) {
      prev_p = p;
      first = false;
    }
    area += (r - prev_r) * (p + prev_p) / 2.0;
    prev_r = r;
    prev_p = p;
  }
  return std::clamp(area, 0.0, 1.0);
}

}  // namespace

double auprc_brute(const std::vector<double>& s, const std::vector<bool>& pos) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  std::uint64_t P = 0;
  for (bool b : pos) P += b ? 1 : 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pts;
  for (double th : thresholds) {
    std::uint64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= th) (pos[i] ? tp : fp)++;
    }
    pts.emplace_back(tp, fp);
  }
  return trapezoid_pr(pts, P);
}

double brier_direct(const std::vector<std::vector<double>>& p, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    double s = 0.0;
    for (std::size_t l = 0; l < p[n].size(); ++l) {
      const double target = static_cast<int>(l) == y[n] ? 1.0 : 0.0;
      s += (p[n][l] - target) * (p[n][l] - target);
    }
    total += s;
  }
  return total / static_cast<double>(p.size());
}

double nll_direct(const std::vector<std::vector<double>>& p, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    total += std::log(std::max(p[n][static_cast<std::size_t>(y[n])], 1e-12));
  }
  return -total / static_cast<double>(p.size());
}

double ece_naive(const std::vector<double>& conf, const std::vector<bool>& correct,
                 std::size_t bins) {
  const double M = static_cast<double>(bins);
  const double n = static_cast<double>(conf.size());
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / M;
    const double hi = static_cast<double>(b + 1) / M;
    double sum_conf = 0.0, hits = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < conf.size(); ++i) {
      const bool inside = (conf[i] > lo && conf[i] <= hi) || (b == 0 && conf[i] == 0.0) ||
                          (b + 1 == bins && conf[i] > hi);
      if (!inside) continue;
      sum_conf += conf[i];
      hits += correct[i] ? 1.0 : 0.0;
      ++k;
    }
    if (k == 0) continue;
    const double kk = static_cast<double>(k);
    total += (kk / n) * std::abs(hits / kk - sum_conf / kk);
  }
  return total;
}

std::vector<std::optional<double>> asw(const std::vector<int>& outcome, std::size_t m) {
  std::vector<std::optional<double>> out(outcome.size());
  std::vector<int> labeled;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    if (outcome[i] >= 0) labeled.push_back(outcome[i]);
    if (labeled.empty()) continue;
    const std::size_t k = std::min(m, labeled.size());
    int hits = 0;
    for (std::size_t j = labeled.size() - k; j < labeled.size(); ++j) hits += labeled[j];
    out[i] = static_cast<double>(hits) / static_cast<double>(k);
  }
  return out;
}

std::vector<double> csw(const std::vector<double>& scores, std::size_t m) {
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t k = std::min(m, i + 1);
    double s = 0.0;
    for (std::size_t j = i + 1 - k; j <= i; ++j) s += scores[j];
    out[i] = s / static_cast<double>(k);
  }
  return out;
}

Counts drop_counts(const std::vector<int>& outcome, const std::vector<double>& scores,
                   std::size_t m, double threshold, double rho) {
  const auto a = asw(outcome, m);
  const auto c = csw(scores, m);
  Counts out;
  for (std::size_t i = m; i < outcome.size(); ++i) {
    if (!a[i]) continue;
    const bool event = *a[i] <= threshold;
    const bool flag = c[i] < rho;
    if (flag && event) ++out.tp;
    if (flag && !event) ++out.fp;
    if (!flag && event) ++out.fn;
    if (!flag && !event) ++out.tn;
  }
  return out;
}

double drop_auprc_brute(const std::vector<int>& outcome, const std::vector<double>& scores,
                        std::size_t m, double threshold) {
  const auto a = asw(outcome, m);
  const auto c = csw(scores, m);
  std::set<double> rhos{0.0, 1.0};
  for (std::size_t i = m; i < outcome.size(); ++i) {
    if (a[i]) rhos.insert(c[i]);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pts;
  std::uint64_t P = 0;
  for (double rho : rhos) {
    const Counts k = drop_counts(outcome, scores, m, threshold, rho);
    P = k.tp + k.fn;
    pts.emplace_back(k.tp, k.fp);
  }
  return trapezoid_pr(pts, P);
}

std::vector<double> random_posterior(std::mt19937_64& rng, std::size_t L, double peak) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> p(L);
  double total = 0.0;
  for (double& v : p) {
    v = g(rng);
    total += v;
  }
  if (peak > 0.0) {
    std::uniform_int_distribution<std::size_t> pick(0, L - 1);
    const std::size_t k = pick(rng);
    p[k] += peak * total;
    total += peak * total;
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace oracle
