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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tempconf/quantized.hpp"

namespace tempconf {

LogLUT::LogLUT(std::size_t size) {
  if (size < 2) throw std::invalid_argument("log table needs at least two segments");
  entries_.resize(size + 1);
  const double n = static_cast<double>(size);
  for (std::size_t k = 0; k <= size; ++k) {
    entries_[k] = std::log(0.5 + 0.5 * static_cast<double>(k) / n);
  }
  entries_[size] = 0.0;

  // ln is concave, so on each segment [lo, hi] the chord error peaks where
  // the tangent slope 1/x equals the chord slope.
  for (std::size_t k = 0; k < size; ++k) {
    const double lo = 0.5 + 0.5 * static_cast<double>(k) / n;
    const double hi = 0.5 + 0.5 * static_cast<double>(k + 1) / n;
    const double slope = (entries_[k + 1] - entries_[k]) / (hi - lo);
    const double x_star = 1.0 / slope;
    const double chord = entries_[k] + slope * (x_star - lo);
    error_bound_ = std::max(error_bound_, std::log(x_star) - chord);
  }
}

}  // namespace tempconf
