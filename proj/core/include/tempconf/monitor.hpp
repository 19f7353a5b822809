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
#include <optional>
#include <span>

#include "tempconf/conformal.hpp"
#include "tempconf/quantized.hpp"
#include "tempconf/signals.hpp"
#include "tempconf/temporal_window.hpp"

namespace tempconf {

struct MonitorConfig {
  std::size_t window = 16;
  SignalConfig signals;
  CalibConfig calib;

  void validate() const;
};

/// Everything the monitor produced for one input.
struct StepResult {
  Decision decision;
  SignalVector signals;
  double uncertainty = 0.0;  // U_t
  double confidence = 0.0;   // max posterior probability
};

/// Streaming accept/abstain monitor over a classifier's outputs.
///
/// Each step computes the temporal signals against the window, scores them
/// with the fitted combiner, forms the nonconformity, passes it through the
/// conformal gate and finally buffers the step. With `quantized` set the
/// window stores 8-bit codes and the divergence and similarity kernels run on
/// the integer path.
class Monitor {
 public:
  Monitor(const MonitorConfig& cfg, const CombinerParams& params, std::size_t classes,
          std::size_t feature_dim, bool quantized = false);

  /// Throws DimensionMismatch or std::invalid_argument on a malformed input;
  /// the monitor state is unchanged in that case.
  StepResult step(std::span<const double> posterior, std::span<const double> feature = {});

  std::size_t steps() const noexcept { return steps_; }
  bool quantized() const noexcept { return quantized_window_.has_value(); }
  const ConformalGate& gate() const noexcept { return gate_; }
  const MonitorConfig& config() const noexcept { return cfg_; }
  const CombinerParams& params() const noexcept { return params_; }

  /// Bytes of mutable state: window, tracker and controller.
  std::size_t state_bytes() const noexcept;

 private:
  MonitorConfig cfg_;
  CombinerParams params_;
  std::size_t classes_;
  std::size_t feature_dim_;
  std::optional<TemporalWindow> window_;
  std::optional<QuantizedWindow> quantized_window_;
  std::optional<LogLUT> lut_;
  ConformalGate gate_;
  std::size_t steps_ = 0;
};

}  // namespace tempconf
