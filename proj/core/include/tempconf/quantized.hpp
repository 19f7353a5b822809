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

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "tempconf/signals.hpp"
#include "tempconf/temporal_window.hpp"

namespace tempconf {

/// 8-bit posterior with a per-tensor scale: probability ~= code * scale.
/// The scale anchors the largest entry at code 255, so each entry is within
/// scale / 2 of its float value and the dequantized sum within L * scale / 2
/// of one.
struct QuantizedPosterior {
  std::vector<std::uint8_t> codes;
  double scale = 0.0;

  friend bool operator==(const QuantizedPosterior&, const QuantizedPosterior&) = default;
};

struct QuantizedPosteriorView {
  std::span<const std::uint8_t> codes;
  double scale = 0.0;

  QuantizedPosteriorView() = default;
  QuantizedPosteriorView(std::span<const std::uint8_t> c, double s) : codes(c), scale(s) {}
  QuantizedPosteriorView(const QuantizedPosterior& p) : codes(p.codes), scale(p.scale) {}  // NOLINT
};

/// Symmetric 8-bit feature: value ~= code * scale, largest magnitude at 127.
struct QuantizedFeature {
  std::vector<std::int8_t> codes;
  double scale = 0.0;
};

QuantizedPosterior quantize_posterior(std::span<const double> p);
void quantize_posterior_into(std::span<const double> p, std::span<std::uint8_t> codes,
                             double& scale);
std::vector<double> dequantize(QuantizedPosteriorView q);

QuantizedFeature quantize_feature(std::span<const double> f);
void quantize_feature_into(std::span<const double> f, std::span<std::int8_t> codes,
                           double& scale);

/// Natural-log table over the mantissa range [0.5, 1].
///
/// lut_log splits x = m * 2^e (m in [0.5, 1)) and returns interp(m) + e ln 2,
/// where interp is linear between `size` + 1 evenly spaced samples of ln on
/// [0.5, 1]. This keeps the absolute error uniform over all of (0, 1]; the
/// exact worst-case interpolation error is computed at construction.
class LogLUT {
 public:
  explicit LogLUT(std::size_t size = 256);

  std::size_t size() const noexcept { return entries_.size() - 1; }
  /// Supremum of |lut_log(x) - ln x| over x in (0, 1].
  double error_bound() const noexcept { return error_bound_; }
  std::span<const double> entries() const noexcept { return entries_; }

 private:
  std::vector<double> entries_;
  double error_bound_ = 0.0;
};

/// Table-driven ln x for x in (0, 1]. Throws std::domain_error for x <= 0.
double lut_log(double x, const LogLUT& lut);

/// JSD of the dequantized, epsilon-smoothed posteriors using lut_log only.
double jsd_quantized(QuantizedPosteriorView p, QuantizedPosteriorView q, const LogLUT& lut,
                     double epsilon);

/// Cosine similarity of integer vectors with a 64-bit accumulator.
///
/// Inputs must be at most 16 bits wide so 2 * 16 + log2(d') bits fit the
/// accumulator for any d' < 2^31. The scales cancel in the ratio and are
/// accepted only for interface symmetry. Dot product and norms are reduced
/// by their common divisor first, which makes the result bit-identical under
/// a common positive integer rescaling of both inputs. Zero norm yields 0.
template <std::signed_integral T>
  requires(sizeof(T) <= 2)
double cosine_int(std::span<const T> a, std::span<const T> b, double scale_a = 1.0,
                  double scale_b = 1.0) {
  (void)scale_a;
  (void)scale_b;
  if (a.size() != b.size()) throw std::invalid_argument("cosine_int: length mismatch");
  std::int64_t dot = 0;
  std::int64_t na = 0;
  std::int64_t nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t x = a[i];
    const std::int64_t y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0 || nb == 0) return 0.0;
  const std::int64_t g = std::gcd(std::gcd(std::llabs(dot), na), nb);
  dot /= g;
  na /= g;
  nb /= g;
  const double c = static_cast<double>(dot) /
                   std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

/// Ring buffer storing 8-bit posterior codes and 8-bit feature codes.
class QuantizedWindow {
 public:
  struct Entry {
    QuantizedPosteriorView posterior;
    std::span<const std::int8_t> feature;
    double feature_scale;
    Label predicted_label;
  };

  QuantizedWindow(std::size_t capacity, std::size_t classes, std::size_t feature_dim = 0);

  /// Quantizes and stores one step. Throws DimensionMismatch (unchanged) on bad sizes.
  void push(std::span<const double> posterior, std::span<const double> feature,
            Label predicted_label);

  Entry lag(std::size_t lag) const;
  bool has_lag(std::size_t lag) const noexcept { return lag >= 1 && lag <= cursor_.filled(); }

  std::size_t size() const noexcept { return cursor_.filled(); }
  std::size_t capacity() const noexcept { return cursor_.capacity(); }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  bool has_features() const noexcept { return feature_dim_ > 0; }
  std::size_t state_bytes() const noexcept;

 private:
  std::size_t classes_;
  std::size_t feature_dim_;
  detail::RingCursor cursor_;
  std::vector<std::uint8_t> posterior_codes_;
  std::vector<double> posterior_scales_;
  std::vector<std::int8_t> feature_codes_;
  std::vector<double> feature_scales_;
  std::vector<Label> labels_;
};

/// Quantized-path signals. The current posterior and feature are quantized
/// the same way as stored entries; the confidence proxy uses the float
/// posterior.
double divergence_signal_quantized(const QuantizedWindow& window, QuantizedPosteriorView current,
                                   const LogLUT& lut, const SignalConfig& cfg);
double stability_signal_quantized(const QuantizedWindow& window,
                                  std::span<const std::int8_t> current_feature,
                                  const SignalConfig& cfg);
SignalVector compute_signals_quantized(const QuantizedWindow& window,
                                       std::span<const double> posterior,
                                       std::span<const double> feature, Label predicted_label,
                                       const LogLUT& lut, const SignalConfig& cfg);

}  // namespace tempconf
