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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tempconf/temporal_window.hpp"

namespace tempconf {

enum class SegmentKind { kID, kCID, kOOD };

struct SegmentSpec {
  SegmentKind kind = SegmentKind::kID;
  std::size_t length = 0;
  int severity = 0;  // 1..5 for kCID, 0 otherwise
  std::uint64_t seed = 0;

  void validate() const;
};

/// How one condition (ID, a CID severity, or OOD) shapes generated records.
struct ConditionProfile {
  double accuracy = 0.9;             // probability that the argmax is the true class
  double temperature = 1.0;          // softmax temperature; > 1 flattens posteriors
  double correct_margin = 4.0;       // mean logit lead of the argmax when correct
  double wrong_margin = 1.5;         // ... when wrong
  double feature_noise = 0.3;        // magnitude of the feature noise process
  double feature_persistence = 0.9;  // AR(1) coefficient of the feature noise
};

/// Synthetic backbone: class posteriors, features and labels for a stream.
///
/// The true class follows a sticky Markov chain. Each step the argmax is the
/// true class with the condition's accuracy, otherwise a uniformly drawn wrong
/// class; the posterior is a tempered softmax of Gaussian logits with the
/// argmax lifted by a margin. Features are the argmax class prototype plus an
/// AR(1) noise process, so ID features are temporally correlated and shifted
/// conditions decorrelate them.
struct GeneratorModel {
  std::size_t classes = 10;
  std::size_t feature_dim = 32;
  double id_accuracy = 0.9;
  double class_dwell = 0.95;  // probability the true class persists to the next step
  double logit_noise = 1.0;
  double margin_spread = 1.0;
  ConditionProfile id;
  /// accuracy below is a drop relative to id_accuracy; index = severity - 1.
  std::array<ConditionProfile, 5> severity_curve;
  ConditionProfile ood;
  std::uint64_t prototype_seed = 0x5eedULL;

  GeneratorModel();

  /// Profile for a segment, with accuracy resolved to an absolute rate.
  ConditionProfile profile(SegmentKind kind, int severity) const;

  void validate() const;
};

/// Deterministic stream for the given segments. Record t runs over the whole
/// stream; segment state (true class, feature noise) carries across segments.
/// OOD records carry kOodLabel.
std::vector<StreamRecord> generate(std::span<const SegmentSpec> segments,
                                   const GeneratorModel& model);

/// Segment kind of every generated step, aligned with generate()'s output.
std::vector<SegmentKind> segment_kinds(std::span<const SegmentSpec> segments);

/// Development mixture: an ID half followed by CID segments of severity 1..5
/// sharing the other half.
std::vector<SegmentSpec> dev_mixture(std::size_t length, std::uint64_t seed);

}  // namespace tempconf
