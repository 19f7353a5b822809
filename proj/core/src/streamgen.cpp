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

#include "tempconf/streamgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace tempconf {

void SegmentSpec::validate() const {
  if (length == 0) throw std::invalid_argument("segment length must be positive");
  if (kind == SegmentKind::kCID) {
    if (severity < 1 || severity > 5) {
      throw std::invalid_argument("CID severity must be in 1..5, got " + std::to_string(severity));
    }
  } else if (severity != 0) {
    throw std::invalid_argument("severity is only valid on CID segments");
  }
}

GeneratorModel::GeneratorModel() {
  id = ConditionProfile{0.0, 1.0, 4.0, 1.5, 0.3, 0.9};
  constexpr std::array<double, 5> drop{0.10, 0.18, 0.26, 0.34, 0.42};
  constexpr std::array<double, 5> temperature{1.05, 1.10, 1.15, 1.20, 1.25};
  constexpr std::array<double, 5> wrong_margin{3.0, 3.2, 3.4, 3.6, 3.8};
  constexpr std::array<double, 5> noise{0.45, 0.6, 0.75, 0.9, 1.05};
  constexpr std::array<double, 5> persistence{0.8, 0.7, 0.6, 0.5, 0.4};
  for (std::size_t s = 0; s < 5; ++s) {
    severity_curve[s] =
        ConditionProfile{drop[s], temperature[s], 4.0, wrong_margin[s], noise[s], persistence[s]};
  }
  ood = ConditionProfile{0.0, 2.5, 1.0, 1.0, 1.0, 0.2};
}

ConditionProfile GeneratorModel::profile(SegmentKind kind, int severity) const {
  ConditionProfile p;
  switch (kind) {
    case SegmentKind::kID:
      p = id;
      p.accuracy = id_accuracy;
      break;
    case SegmentKind::kCID:
      p = severity_curve.at(static_cast<std::size_t>(severity - 1));
      p.accuracy = std::max(id_accuracy - p.accuracy, 1.0 / static_cast<double>(classes));
      break;
    case SegmentKind::kOOD:
      p = ood;
      p.accuracy = 0.0;
      break;
  }
  return p;
}

void GeneratorModel::validate() const {
  if (classes < 2) throw std::invalid_argument("generator needs at least two classes");
  if (!(id_accuracy > 0.0 && id_accuracy <= 1.0)) {
    throw std::invalid_argument("id_accuracy must lie in (0, 1]");
  }
  if (!(class_dwell >= 0.0 && class_dwell <= 1.0)) {
    throw std::invalid_argument("class_dwell must lie in [0, 1]");
  }
  for (std::size_t s = 1; s < severity_curve.size(); ++s) {
    const auto& a = severity_curve[s - 1];
    const auto& b = severity_curve[s];
    if (b.accuracy < a.accuracy || b.temperature < a.temperature ||
        b.feature_noise < a.feature_noise) {
      throw std::invalid_argument("severity curve must degrade monotonically");
    }
  }
}

namespace {

class StreamState {
 public:
  explicit StreamState(const GeneratorModel& model)
      : model_(model),
        prototypes_(model.classes * model.feature_dim),
        noise_(model.feature_dim, 0.0) {
    std::mt19937_64 rng(model.prototype_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s = model.feature_dim > 0 ? 1.0 / std::sqrt(double(model.feature_dim)) : 0.0;
    for (double& v : prototypes_) v = normal(rng) * s;
  }

  void fill(StreamRecord& rec, SegmentKind kind, const ConditionProfile& cond,
            std::mt19937_64& rng) {
    const std::size_t L = model_.classes;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<Label> any_class(0, static_cast<Label>(L) - 1);
    std::normal_distribution<double> normal(0.0, 1.0);

    if (!true_class_ || unit(rng) >= model_.class_dwell) true_class_ = any_class(rng);

    Label predicted = *true_class_;
    bool correct = true;
    if (kind == SegmentKind::kOOD) {
      predicted = any_class(rng);
      correct = false;
    } else if (unit(rng) >= cond.accuracy) {
      std::uniform_int_distribution<Label> offset(1, static_cast<Label>(L) - 1);
      predicted = static_cast<Label>((*true_class_ + offset(rng)) % static_cast<Label>(L));
      correct = false;
    }

    std::vector<double> logits(L);
    for (double& z : logits) z = model_.logit_noise * normal(rng);
    double runner_up = -1e300;
    for (std::size_t k = 0; k < L; ++k) {
      if (static_cast<Label>(k) != predicted) runner_up = std::max(runner_up, logits[k]);
    }
    const double mean = correct ? cond.correct_margin : cond.wrong_margin;
    const double margin = std::max(0.05, mean + model_.margin_spread * normal(rng));
    logits[static_cast<std::size_t>(predicted)] = runner_up + margin;

    rec.posterior.assign(L, 0.0);
    const double top = runner_up + margin;
    double total = 0.0;
    for (std::size_t k = 0; k < L; ++k) {
      rec.posterior[k] = std::exp((logits[k] - top) / cond.temperature);
      total += rec.posterior[k];
    }
    for (double& p : rec.posterior) p /= total;

    const std::size_t d = model_.feature_dim;
    rec.feature.assign(d, 0.0);
    if (d > 0) {
      const double a = cond.feature_persistence;
      const double innovation = std::sqrt(std::max(0.0, 1.0 - a * a)) / std::sqrt(double(d));
      for (double& e : noise_) e = a * e + innovation * normal(rng);
      const bool has_prototype = kind != SegmentKind::kOOD;
      const double* proto = prototypes_.data() + static_cast<std::size_t>(predicted) * d;
      for (std::size_t i = 0; i < d; ++i) {
        rec.feature[i] = (has_prototype ? proto[i] : 0.0) + cond.feature_noise * noise_[i];
      }
    }
    rec.label = kind == SegmentKind::kOOD ? kOodLabel : *true_class_;
  }

 private:
  const GeneratorModel& model_;
  std::vector<double> prototypes_;
  std::vector<double> noise_;
  std::optional<Label> true_class_;
};

}  // namespace

std::vector<StreamRecord> generate(std::span<const SegmentSpec> segments,
                                   const GeneratorModel& model) {
  model.validate();
  std::size_t total = 0;
  for (const auto& s : segments) {
    s.validate();
    total += s.length;
  }
  if (total == 0) throw std::invalid_argument("stream must contain at least one step");

  StreamState state(model);
  std::vector<StreamRecord> records;
  records.reserve(total);
  std::uint64_t t = 0;
  for (const auto& seg : segments) {
    std::mt19937_64 rng(seg.seed);
    const ConditionProfile cond = model.profile(seg.kind, seg.severity);
    for (std::size_t i = 0; i < seg.length; ++i) {
      StreamRecord rec;
      rec.t = t++;
      state.fill(rec, seg.kind, cond, rng);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::vector<SegmentKind> segment_kinds(std::span<const SegmentSpec> segments) {
  std::vector<SegmentKind> kinds;
  for (const auto& s : segments) kinds.insert(kinds.end(), s.length, s.kind);
  return kinds;
}

std::vector<SegmentSpec> dev_mixture(std::size_t length, std::uint64_t seed) {
  if (length < 10) throw std::invalid_argument("dev mixture needs at least 10 steps");
  std::vector<SegmentSpec> spec;
  const std::size_t id_len = length / 2;
  spec.push_back({SegmentKind::kID, id_len, 0, seed});
  const std::size_t shifted = length - id_len;
  for (int s = 1; s <= 5; ++s) {
    const std::size_t len = s < 5 ? shifted / 5 : shifted - 4 * (shifted / 5);
    spec.push_back({SegmentKind::kCID, len, s, seed + static_cast<std::uint64_t>(s)});
  }
  return spec;
}

}  // namespace tempconf
