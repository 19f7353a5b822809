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
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempconf/conformal.hpp"
#include "tempconf/signals.hpp"
#include "tempconf/temporal_window.hpp"

namespace tempconf {

// Stream file:
//   #tempconf-stream version=1 L=<classes> d=<feature dim>
//   <t>;<label>;<p_0>,...,<p_{L-1}>[;<f_0>,...,<f_{d-1}>]
// Label is a class index, -1 for OOD, or empty when unknown. Numbers are
// written with 9 significant digits. Every record line ends with '\n'.

inline constexpr int kStreamFormatVersion = 1;

struct StreamHeader {
  int version = kStreamFormatVersion;
  std::size_t classes = 0;
  std::size_t feature_dim = 0;
};

/// Malformed or inconsistent input; `record_index` is the 0-based record
/// number (nullopt for header problems).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::optional<std::size_t> record_index);
  std::optional<std::size_t> record_index() const noexcept { return record_index_; }

 private:
  std::optional<std::size_t> record_index_;
};

/// Sequential reader: records come out in file order, each validated as it is read.
class StreamReader {
 public:
  explicit StreamReader(const std::string& path);

  const StreamHeader& header() const noexcept { return header_; }
  /// Next record, or nullopt at end of file. Throws FormatError.
  std::optional<StreamRecord> next();
  std::size_t records_read() const noexcept { return index_; }

 private:
  std::ifstream in_;
  StreamHeader header_;
  std::size_t index_ = 0;
};

std::vector<StreamRecord> read_stream(const std::string& path, StreamHeader* header = nullptr);

void write_stream(std::ostream& out, const StreamHeader& header,
                  std::span<const StreamRecord> records);
void write_stream(const std::string& path, const StreamHeader& header,
                  std::span<const StreamRecord> records);

/// One line of a decisions file.
struct DecisionRecord {
  std::uint64_t t = 0;
  Decision decision;
  double uncertainty = 0.0;
  SignalVector signals;
};

// Decisions file:
//   #tempconf-decisions version=1
//   <t>;<accept|abstain>;<label>;<r>;<q>;<U>;<D>;<1-S>;<1-c>;<m>;<warmup 0|1>

void write_decisions(std::ostream& out, std::span<const DecisionRecord> decisions);
void write_decisions(const std::string& path, std::span<const DecisionRecord> decisions);
std::vector<DecisionRecord> read_decisions(const std::string& path);

/// "%.9g" formatting used by all text outputs.
std::string format_number(double value);

}  // namespace tempconf
