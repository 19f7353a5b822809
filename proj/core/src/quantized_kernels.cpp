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

// Integer-friendly kernels for the quantized monitor path. Nothing in this
// file may call a transcendental function; the log table is built elsewhere.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tempconf/quantized.hpp"

namespace tempconf {

void quantize_posterior_into(std::span<const double> p, std::span<std::uint8_t> codes,
                             double& scale) {
  if (codes.size() != p.size()) throw DimensionMismatch("quantize: code buffer size mismatch");
  double peak = 0.0;
  for (double v : p) peak = std::max(peak, v);
  if (!(peak > 0.0)) throw std::invalid_argument("quantize: posterior has no positive entry");
  scale = peak / 255.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double c = std::nearbyint(std::max(p[i], 0.0) / scale);
    codes[i] = static_cast<std::uint8_t>(std::clamp(c, 0.0, 255.0));
  }
}

QuantizedPosterior quantize_posterior(std::span<const double> p) {
  QuantizedPosterior q;
  q.codes.resize(p.size());
  quantize_posterior_into(p, q.codes, q.scale);
  return q;
}

std::vector<double> dequantize(QuantizedPosteriorView q) {
  std::vector<double> out(q.codes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = q.codes[i] * q.scale;
  return out;
}

void quantize_feature_into(std::span<const double> f, std::span<std::int8_t> codes,
                           double& scale) {
  if (codes.size() != f.size()) throw DimensionMismatch("quantize: code buffer size mismatch");
  double peak = 0.0;
  for (double v : f) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) {
    scale = 0.0;
    std::fill(codes.begin(), codes.end(), std::int8_t{0});
    return;
  }
  scale = peak / 127.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double c = std::nearbyint(f[i] / scale);
    codes[i] = static_cast<std::int8_t>(std::clamp(c, -127.0, 127.0));
  }
}

QuantizedFeature quantize_feature(std::span<const double> f) {
  QuantizedFeature q;
  q.codes.resize(f.size());
  quantize_feature_into(f, q.codes, q.scale);
  return q;
}

double lut_log(double x, const LogLUT& lut) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("lut_log: argument must be positive and finite");
  }
  const auto table = lut.entries();
  const std::size_t n = lut.size();
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);  // [0.5, 1)
  const double pos = (mantissa - 0.5) * 2.0 * static_cast<double>(n);
  std::size_t k = static_cast<std::size_t>(pos);
  if (k >= n) k = n - 1;
  const double frac = pos - static_cast<double>(k);
  return table[k] + (table[k + 1] - table[k]) * frac +
         static_cast<double>(exponent) * std::numbers::ln2;
}

double jsd_quantized(QuantizedPosteriorView p, QuantizedPosteriorView q, const LogLUT& lut,
                     double epsilon) {
  if (p.codes.size() != q.codes.size()) throw std::invalid_argument("jsd: length mismatch");
  const double norm = 1.0 + static_cast<double>(p.codes.size()) * epsilon;
  double total = 0.0;
  for (std::size_t i = 0; i < p.codes.size(); ++i) {
    const double a = (p.codes[i] * p.scale + epsilon) / norm;
    const double b = (q.codes[i] * q.scale + epsilon) / norm;
    if (a == b) continue;
    const double m = 0.5 * (a + b);
    const double log_m = lut_log(m, lut);
    if (a > 0.0) total += a * (lut_log(a, lut) - log_m);
    if (b > 0.0) total += b * (lut_log(b, lut) - log_m);
  }
  return std::clamp(0.5 * total, 0.0, std::numbers::ln2);
}

}  // namespace tempconf
