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
#include <string>
#include <utility>
#include <vector>

#include "tempconf/fitting.hpp"
#include "tempconf/monitor.hpp"
#include "tempconf/signals.hpp"
#include "tempconf/streamgen.hpp"

namespace tempconf {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Ordered "key = value" entries; '#' starts a comment. Keys may repeat.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }
  /// Last value for `key`, if any.
  std::optional<std::string> get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct EvalSettings {
  std::size_t window_m = 100;
  std::size_t ece_bins = 15;
  std::size_t id_reference_steps = 1000;
};

/// Everything a run can be configured with.
struct RunConfig {
  MonitorConfig monitor;
  FitConfig fit;
  EvalSettings eval;

  RunConfig();
};

/// Builds a RunConfig from key/value text. Recognized keys: lambda, risk_level,
/// budget, warmup_steps (default 3 W), quantile_step, burst_window, W, lag_set,
/// lag_weights (default proportional to 1/lag), proxy_blend, epsilon, l2,
/// max_iters, tol, class_balance, m, ece_bins, eval_id_steps. Unknown keys and
/// out-of-range values throw ConfigError.
RunConfig parse_run_config(const KeyValueFile& kv);
RunConfig load_run_config(const std::string& path);

/// Canonical key/value dump of every setting (used in run manifests).
std::string config_snapshot(const RunConfig& cfg);

/// Combiner parameter file: "w = w0,w1,w2,w3" and "b = bias" at full precision.
void write_params(const std::string& path, const CombinerParams& params);
CombinerParams read_params(const std::string& path);

/// Generator file: model keys (L, d, id_accuracy, class_dwell, seed) and
/// repeated "segment = ID|CID|OOD <length> [severity] [seed=N]" lines.
/// Segment seeds default to seed * 1000 + segment index.
struct GenSpec {
  GeneratorModel model;
  std::vector<SegmentSpec> segments;
  std::uint64_t seed = 1;
};

GenSpec parse_gen_spec(const KeyValueFile& kv, std::optional<std::uint64_t> seed_override = {});

}  // namespace tempconf
