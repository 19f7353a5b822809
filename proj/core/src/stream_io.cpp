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

#include "tempconf/stream_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string_view>

namespace tempconf {
namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<double> parse_list(std::string_view s, std::size_t expected, const char* what,
                               std::size_t index) {
  std::vector<double> values;
  if (expected == 0) {
    if (!s.empty()) throw FormatError(std::string(what) + ": unexpected values", index);
    return values;
  }
  const auto parts = split(s, ',');
  if (parts.size() != expected) {
    throw FormatError(std::string(what) + ": expected " + std::to_string(expected) +
                          " values, found " + std::to_string(parts.size()),
                      index);
  }
  values.reserve(expected);
  for (auto p : parts) {
    double v = 0.0;
    if (!parse_number(p, v) || !std::isfinite(v)) {
      throw FormatError(std::string(what) + ": bad number '" + std::string(p) + "'", index);
    }
    values.push_back(v);
  }
  return values;
}

StreamHeader parse_header(const std::string& line) {
  std::istringstream ss(line);
  std::string magic;
  ss >> magic;
  if (magic != "#tempconf-stream") throw FormatError("missing stream header", std::nullopt);
  StreamHeader h;
  bool have_version = false;
  bool have_classes = false;
  bool have_dim = false;
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw FormatError("bad header token " + token, std::nullopt);
    const std::string_view key(token.data(), eq);
    const std::string_view value(token.data() + eq + 1, token.size() - eq - 1);
    bool ok = false;
    if (key == "version") {
      ok = parse_number(value, h.version);
      have_version = ok;
    } else if (key == "L") {
      ok = parse_number(value, h.classes);
      have_classes = ok;
    } else if (key == "d") {
      ok = parse_number(value, h.feature_dim);
      have_dim = ok;
    }
    if (!ok) throw FormatError("bad header token " + token, std::nullopt);
  }
  if (!have_version || !have_classes || !have_dim) {
    throw FormatError("header must declare version, L and d", std::nullopt);
  }
  if (h.version != kStreamFormatVersion) {
    throw FormatError("unsupported stream version " + std::to_string(h.version), std::nullopt);
  }
  if (h.classes < 2) throw FormatError("header L must be >= 2", std::nullopt);
  return h;
}

void append_list(std::string& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

FormatError::FormatError(const std::string& what, std::optional<std::size_t> record_index)
    : std::runtime_error(record_index ? "record " + std::to_string(*record_index) + ": " + what
                                      : what),
      record_index_(record_index) {}

StreamReader::StreamReader(const std::string& path) : in_(path) {
  if (!in_) throw std::runtime_error("cannot open stream file " + path);
  std::string line;
  if (!std::getline(in_, line)) throw FormatError("empty stream file", std::nullopt);
  header_ = parse_header(line);
}

std::optional<StreamRecord> StreamReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  const std::size_t index = index_;
  if (in_.eof()) throw FormatError("truncated record (no line terminator)", index);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto fields = split(line, ';');
  const bool with_features = header_.feature_dim > 0;
  if (fields.size() != 3 && fields.size() != 4) {
    throw FormatError("expected 3 or 4 ';'-separated fields, found " +
                          std::to_string(fields.size()),
                      index);
  }
  if (with_features && fields.size() != 4) throw FormatError("missing feature field", index);

  StreamRecord rec;
  if (!parse_number(fields[0], rec.t)) throw FormatError("bad step index", index);
  if (!fields[1].empty()) {
    Label label = 0;
    if (!parse_number(fields[1], label) || label < kOodLabel ||
        (label >= 0 && static_cast<std::size_t>(label) >= header_.classes)) {
      throw FormatError("bad label '" + std::string(fields[1]) + "'", index);
    }
    rec.label = label;
  }
  rec.posterior = parse_list(fields[2], header_.classes, "posterior", index);
  try {
    validate_posterior(rec.posterior);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what(), index);
  }
  if (fields.size() == 4) rec.feature = parse_list(fields[3], header_.feature_dim, "feature", index);
  ++index_;
  return rec;
}

std::vector<StreamRecord> read_stream(const std::string& path, StreamHeader* header) {
  StreamReader reader(path);
  std::vector<StreamRecord> records;
  while (auto rec = reader.next()) records.push_back(std::move(*rec));
  if (header) *header = reader.header();
  return records;
}

void write_stream(std::ostream& out, const StreamHeader& header,
                  std::span<const StreamRecord> records) {
  out << "#tempconf-stream version=" << header.version << " L=" << header.classes
      << " d=" << header.feature_dim << '\n';
  std::string line;
  for (const auto& r : records) {
    if (r.posterior.size() != header.classes || r.feature.size() != header.feature_dim) {
      throw DimensionMismatch("record " + std::to_string(r.t) + " does not match header");
    }
    line.clear();
    line += std::to_string(r.t);
    line += ';';
    if (r.label) line += std::to_string(*r.label);
    line += ';';
    append_list(line, r.posterior);
    if (header.feature_dim > 0) {
      line += ';';
      append_list(line, r.feature);
    }
    line += '\n';
    out << line;
  }
}

void write_stream(const std::string& path, const StreamHeader& header,
                  std::span<const StreamRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_stream(out, header, records);
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_decisions(std::ostream& out, std::span<const DecisionRecord> decisions) {
  out << "#tempconf-decisions version=" << kStreamFormatVersion << '\n';
  for (const auto& d : decisions) {
    const auto& dec = d.decision;
    out << d.t << ';' << (dec.abstained() ? "abstain" : "accept") << ';' << dec.label << ';'
        << format_number(dec.score) << ';' << format_number(dec.quantile) << ';'
        << format_number(d.uncertainty) << ';' << format_number(d.signals.divergence) << ';'
        << format_number(d.signals.instability) << ';' << format_number(d.signals.inconsistency)
        << ';' << format_number(d.signals.proxy) << ';' << (dec.warmup ? 1 : 0) << '\n';
  }
}

void write_decisions(const std::string& path, std::span<const DecisionRecord> decisions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_decisions(out, decisions);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<DecisionRecord> read_decisions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open decisions file " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#tempconf-decisions", 0) != 0) {
    throw FormatError("missing decisions header", std::nullopt);
  }
  std::vector<DecisionRecord> out;
  while (std::getline(in, line)) {
    const std::size_t index = out.size();
    if (in.eof()) throw FormatError("truncated decision record", index);
    const auto f = split(line, ';');
    if (f.size() != 11) throw FormatError("expected 11 fields", index);
    DecisionRecord r;
    Decision& d = r.decision;
    int warm = 0;
    bool ok = parse_number(f[0], r.t) && parse_number(f[2], d.label) &&
              parse_number(f[3], d.score) && parse_number(f[4], d.quantile) &&
              parse_number(f[5], r.uncertainty) && parse_number(f[6], r.signals.divergence) &&
              parse_number(f[7], r.signals.instability) &&
              parse_number(f[8], r.signals.inconsistency) && parse_number(f[9], r.signals.proxy) &&
              parse_number(f[10], warm);
    if (f[1] == "abstain") {
      d.kind = DecisionKind::kAbstain;
    } else if (f[1] == "accept") {
      d.kind = DecisionKind::kAccept;
    } else {
      ok = false;
    }
    if (!ok || (warm != 0 && warm != 1)) throw FormatError("malformed decision record", index);
    d.warmup = warm == 1;
    out.push_back(r);
  }
  return out;
}

}  // namespace tempconf
