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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempconf {

/// Class index. Negative values are reserved for sentinels.
using Label = std::int32_t;

/// Label carried by out-of-distribution records in stream files.
inline constexpr Label kOodLabel = -1;

/// Tolerance on the posterior simplex constraint for the float path.
inline constexpr double kSimplexTolerance = 1e-5;

/// One timestep of a classifier output stream.
struct StreamRecord {
  std::uint64_t t = 0;
  std::vector<double> posterior;
  std::vector<double> feature;  // empty when the stream carries no features
  std::optional<Label> label;   // ground truth, evaluation only; kOodLabel marks OOD

  bool is_ood() const noexcept { return label && *label == kOodLabel; }
  bool has_class_label() const noexcept { return label && *label >= 0; }

  friend bool operator==(const StreamRecord&, const StreamRecord&) = default;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientHistory : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Throws std::invalid_argument unless `p` is a finite probability vector.
void validate_posterior(std::span<const double> p, double tolerance = kSimplexTolerance);

namespace detail {

// Slot arithmetic shared by the float and quantized windows.
class RingCursor {
 public:
  explicit RingCursor(std::size_t capacity);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t filled() const noexcept { return filled_; }

  // Slot that the next push writes to; advances the cursor.
  std::size_t advance() noexcept;

  // Slot holding the entry pushed `lag` pushes before the latest one (lag 1 = latest).
  std::size_t slot_for_lag(std::size_t lag) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
};

}  // namespace detail

/// Read-only view of one buffered step.
struct LagEntry {
  std::span<const double> posterior;
  std::span<const double> feature;
  Label predicted_label;
};

/// Fixed-capacity ring of the last W (posterior, feature, predicted label) triples.
///
/// Storage is allocated once at construction as flat W*L and W*d' arrays, so
/// the footprint depends only on (W, L, d'). A feature dimension of 0 disables
/// feature buffering.
class TemporalWindow {
 public:
  TemporalWindow(std::size_t capacity, std::size_t classes, std::size_t feature_dim = 0);

  /// Appends a step, evicting the oldest when full. Throws DimensionMismatch
  /// (window unchanged) if the posterior or feature length is wrong.
  void push(std::span<const double> posterior, std::span<const double> feature,
            Label predicted_label);

  /// Entry pushed exactly `lag` pushes before the most recent one; lag 1 is
  /// the most recent. Throws InsufficientHistory if lag is 0 or > size().
  LagEntry lag(std::size_t lag) const;

  bool has_lag(std::size_t lag) const noexcept { return lag >= 1 && lag <= cursor_.filled(); }

  std::size_t size() const noexcept { return cursor_.filled(); }
  std::size_t capacity() const noexcept { return cursor_.capacity(); }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  bool has_features() const noexcept { return feature_dim_ > 0; }

  /// Bytes owned by the window (object plus heap buffers).
  std::size_t state_bytes() const noexcept;

 private:
  std::size_t classes_;
  std::size_t feature_dim_;
  detail::RingCursor cursor_;
  std::vector<double> posteriors_;
  std::vector<double> features_;
  std::vector<Label> labels_;
};

/// Fixed linear map from a d-dimensional feature to d' channels (a 1x1
/// projection applied to a pooled activation). Row-major d' x d weights.
class FeatureProjector {
 public:
  FeatureProjector(std::size_t in_dim, std::size_t out_dim, std::vector<double> weights);

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }

  std::vector<double> apply(std::span<const double> feature) const;

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::vector<double> weights_;
};

}  // namespace tempconf
