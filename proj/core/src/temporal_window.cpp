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

#include "tempconf/temporal_window.hpp"

#include <algorithm>
#include <cmath>

namespace tempconf {

void validate_posterior(std::span<const double> p, double tolerance) {
  if (p.size() < 2) {
    throw std::invalid_argument("posterior needs at least two classes");
  }
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("posterior has a non-finite entry");
    }
    if (v < 0.0) {
      throw std::invalid_argument("posterior has a negative entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw std::invalid_argument("posterior sums to " + std::to_string(sum) + ", not 1");
  }
}

namespace detail {

RingCursor::RingCursor(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("ring capacity must be positive");
  }
}

std::size_t RingCursor::advance() noexcept {
  const std::size_t slot = head_;
  head_ = (head_ + 1) % capacity_;
  filled_ = std::min(filled_ + 1, capacity_);
  return slot;
}

std::size_t RingCursor::slot_for_lag(std::size_t lag) const {
  if (lag == 0 || lag > filled_) {
    throw InsufficientHistory("lag " + std::to_string(lag) + " exceeds buffered history of " +
                              std::to_string(filled_));
  }
  return (head_ + capacity_ - lag) % capacity_;
}

}  // namespace detail

TemporalWindow::TemporalWindow(std::size_t capacity, std::size_t classes, std::size_t feature_dim)
    : classes_(classes),
      feature_dim_(feature_dim),
      cursor_(capacity),
      posteriors_(capacity * classes),
      features_(capacity * feature_dim),
      labels_(capacity, 0) {
  if (classes < 2) {
    throw std::invalid_argument("window needs at least two classes");
  }
}

void TemporalWindow::push(std::span<const double> posterior, std::span<const double> feature,
                          Label predicted_label) {
  if (posterior.size() != classes_) {
    throw DimensionMismatch("posterior length " + std::to_string(posterior.size()) +
                            " != configured " + std::to_string(classes_));
  }
  if (feature.size() != feature_dim_) {
    throw DimensionMismatch("feature length " + std::to_string(feature.size()) +
                            " != configured " + std::to_string(feature_dim_));
  }
  const std::size_t slot = cursor_.advance();
  std::copy(posterior.begin(), posterior.end(), posteriors_.begin() + slot * classes_);
  std::copy(feature.begin(), feature.end(), features_.begin() + slot * feature_dim_);
  labels_[slot] = predicted_label;
}

LagEntry TemporalWindow::lag(std::size_t lag) const {
  const std::size_t slot = cursor_.slot_for_lag(lag);
  return LagEntry{
      std::span<const double>(posteriors_).subspan(slot * classes_, classes_),
      std::span<const double>(features_).subspan(slot * feature_dim_, feature_dim_),
      labels_[slot],
  };
}

std::size_t TemporalWindow::state_bytes() const noexcept {
  return sizeof(*this) + posteriors_.capacity() * sizeof(double) +
         features_.capacity() * sizeof(double) + labels_.capacity() * sizeof(Label);
}

FeatureProjector::FeatureProjector(std::size_t in_dim, std::size_t out_dim,
                                   std::vector<double> weights)
    : in_dim_(in_dim), out_dim_(out_dim), weights_(std::move(weights)) {
  if (weights_.size() != in_dim_ * out_dim_) {
    throw DimensionMismatch("projection weights must be out_dim x in_dim");
  }
}

std::vector<double> FeatureProjector::apply(std::span<const double> feature) const {
  if (feature.size() != in_dim_) {
    throw DimensionMismatch("feature length does not match projection input");
  }
  std::vector<double> out(out_dim_, 0.0);
  for (std::size_t r = 0; r < out_dim_; ++r) {
    const double* row = weights_.data() + r * in_dim_;
    double acc = 0.0;
    for (std::size_t c = 0; c < in_dim_; ++c) {
      acc += row[c] * feature[c];
    }
    out[r] = acc;
  }
  return out;
}

}  // namespace tempconf
