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

#include <benchmark/benchmark.h>

#include <vector>

#include "tempconf/monitor.hpp"
#include "tempconf/quantized.hpp"
#include "tempconf/signals.hpp"
#include "tempconf/streamgen.hpp"

using namespace tempconf;

namespace {

const std::vector<StreamRecord>& stream() {
  static const auto recs = generate(dev_mixture(4096, 7), GeneratorModel{});
  return recs;
}

const CombinerParams kParams{{3.0, 1.0, 5.0, 6.0}, -6.0};

void monitor_step(benchmark::State& state, bool quantized) {
  const auto& recs = stream();
  const GeneratorModel model;
  Monitor mon(MonitorConfig{}, kParams, model.classes, model.feature_dim, quantized);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& r = recs[i++ % recs.size()];
    benchmark::DoNotOptimize(mon.step(r.posterior, r.feature));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_MonitorStepFloat(benchmark::State& state) { monitor_step(state, false); }
void BM_MonitorStepQuantized(benchmark::State& state) { monitor_step(state, true); }

void BM_Jsd(benchmark::State& state) {
  const auto& recs = stream();
  std::size_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(jsd(recs[i].posterior, recs[i - 1].posterior, 1e-6));
    i = i + 1 < recs.size() ? i + 1 : 1;
  }
}

void BM_JsdQuantized(benchmark::State& state) {
  const auto& recs = stream();
  std::vector<QuantizedPosterior> q;
  for (const auto& r : recs) q.push_back(quantize_posterior(r.posterior));
  const LogLUT lut;
  std::size_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(jsd_quantized(q[i], q[i - 1], lut, 1e-6));
    i = i + 1 < q.size() ? i + 1 : 1;
  }
}

void BM_LutLog(benchmark::State& state) {
  const LogLUT lut;
  double x = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lut_log(x, lut));
    x = x < 0.5 ? x * 1.37 : 1e-6;
  }
}

}  // namespace

BENCHMARK(BM_MonitorStepFloat);
BENCHMARK(BM_MonitorStepQuantized);
BENCHMARK(BM_Jsd);
BENCHMARK(BM_JsdQuantized);
BENCHMARK(BM_LutLog);
BENCHMARK_MAIN();
