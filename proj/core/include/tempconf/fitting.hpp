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
#include <span>
#include <stdexcept>
#include <vector>

#include "tempconf/signals.hpp"
#include "tempconf/temporal_window.hpp"

namespace tempconf {

/// One labeled development example: the signal vector and whether the
/// backbone's prediction at that step was wrong.
struct DevExample {
  SignalVector signals;
  bool misclassified = false;
};

struct FitConfig {
  double l2 = 1e-4;
  std::size_t max_iters = 200;
  double tol = 1e-10;  // on the gradient norm
  bool class_balance = true;

  void validate() const;
};

class DegenerateDevSet : public std::invalid_argument {
 public:
  DegenerateDevSet() : std::invalid_argument("degenerate development set: need both targets") {}
};

/// Class-weighted mean binary cross-entropy plus (l2 / 2) ||w||^2 (bias not
/// penalized). Parameters are packed as [w0, w1, w2, w3, b].
class CombinerObjective {
 public:
  using Vec = std::array<double, 5>;

  /// Examples are copied and put in a canonical order, so every sum below is
  /// independent of the caller's ordering.
  CombinerObjective(std::span<const DevExample> examples, double l2, bool class_balance);

  double value(const Vec& theta) const;
  Vec gradient(const Vec& theta) const;
  /// 5x5 Hessian, row-major.
  std::array<double, 25> hessian(const Vec& theta) const;

  double positive_weight() const noexcept { return weight_pos_; }
  double negative_weight() const noexcept { return weight_neg_; }

  static Vec pack(const CombinerParams& p) noexcept;
  static CombinerParams unpack(const Vec& theta) noexcept;

 private:
  std::vector<DevExample> examples_;
  double l2_;
  double weight_pos_ = 1.0;
  double weight_neg_ = 1.0;
};

struct FitResult {
  CombinerParams params;
  std::vector<double> objective_trace;  // objective at each accepted iterate, starting at zero
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

/// Fits (w, b) from a zero start with damped Newton steps and Armijo
/// backtracking; the objective never increases between iterates.
/// Throws DegenerateDevSet when only one target value occurs and
/// std::invalid_argument on non-finite signals or fewer than two examples.
FitResult fit_combiner_detailed(std::span<const DevExample> examples, const FitConfig& cfg);

CombinerParams fit_combiner(std::span<const DevExample> examples, const FitConfig& cfg);

struct CombinerEval {
  double log_loss = 0.0;  // class-weighted mean cross-entropy
  double accuracy = 0.0;  // at the 0.5 probability threshold
};

/// Runs the float signal path over a labeled stream and returns one example
/// per record with a class label (OOD and unlabeled records only feed the
/// window). Misclassified means argmax != label.
std::vector<DevExample> collect_dev_examples(std::span<const StreamRecord> records,
                                             std::size_t window, const SignalConfig& cfg);

CombinerEval eval_combiner(const CombinerParams& params, std::span<const DevExample> examples,
                           bool class_balance = true);

}  // namespace tempconf
