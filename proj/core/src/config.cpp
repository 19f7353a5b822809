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

#include "tempconf/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tempconf/stream_io.hpp"

namespace tempconf {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  return out;
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv.entries_.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  std::optional<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out = v;
  }
  return out;
}

std::vector<std::string> KeyValueFile::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

RunConfig::RunConfig() { monitor.calib.warmup_steps = 3 * monitor.window; }

RunConfig parse_run_config(const KeyValueFile& kv) {
  static const std::set<std::string> known{
      "lambda", "risk_level", "budget", "warmup_steps", "quantile_step", "burst_window",
      "W",      "lag_set",    "lag_weights", "proxy_blend", "epsilon",   "l2",
      "max_iters", "tol",     "class_balance", "m",       "ece_bins",  "eval_id_steps"};
  for (const auto& [k, v] : kv.entries()) {
    if (!known.contains(k)) throw ConfigError("unknown config key '" + k + "'");
  }

  RunConfig cfg;
  auto& mon = cfg.monitor;
  auto num = [&](const char* key, auto& field) {
    if (auto v = kv.get(key)) {
      if constexpr (std::is_floating_point_v<std::remove_reference_t<decltype(field)>>) {
        field = to_double(key, *v);
      } else {
        field = static_cast<std::remove_reference_t<decltype(field)>>(to_uint(key, *v));
      }
    }
  };
  num("W", mon.window);
  mon.calib.warmup_steps = 3 * mon.window;
  num("lambda", mon.calib.lambda);
  num("risk_level", mon.calib.risk_level);
  num("budget", mon.calib.budget);
  num("warmup_steps", mon.calib.warmup_steps);
  num("quantile_step", mon.calib.quantile_step);
  num("burst_window", mon.calib.burst_window);
  num("proxy_blend", mon.signals.proxy_blend);
  num("epsilon", mon.signals.epsilon);
  if (auto v = kv.get("lag_set")) {
    mon.signals.lags.clear();
    for (const auto& item : split_list(*v)) mon.signals.lags.push_back(to_uint("lag_set", item));
  }
  if (auto v = kv.get("lag_weights")) {
    mon.signals.lag_weights.clear();
    for (const auto& item : split_list(*v)) {
      mon.signals.lag_weights.push_back(to_double("lag_weights", item));
    }
  } else {
    for (std::size_t lag : mon.signals.lags) {
      if (lag == 0) throw ConfigError("lag_set: lags must be positive");
    }
    mon.signals.lag_weights = SignalConfig::inverse_lag_weights(mon.signals.lags);
  }
  num("l2", cfg.fit.l2);
  num("max_iters", cfg.fit.max_iters);
  num("tol", cfg.fit.tol);
  if (auto v = kv.get("class_balance")) cfg.fit.class_balance = to_bool("class_balance", *v);
  num("m", cfg.eval.window_m);
  num("ece_bins", cfg.eval.ece_bins);
  num("eval_id_steps", cfg.eval.id_reference_steps);

  try {
    mon.validate();
    cfg.fit.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.eval.window_m == 0) throw ConfigError("m must be positive");
  if (cfg.eval.ece_bins == 0) throw ConfigError("ece_bins must be positive");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(KeyValueFile::load(path));
}

std::string config_snapshot(const RunConfig& cfg) {
  const auto& m = cfg.monitor;
  std::vector<double> lags(m.signals.lags.begin(), m.signals.lags.end());
  std::ostringstream out;
  out << "W = " << m.window << '\n'
      << "lag_set = " << join(lags) << '\n'
      << "lag_weights = " << join(m.signals.lag_weights) << '\n'
      << "proxy_blend = " << format_number(m.signals.proxy_blend) << '\n'
      << "epsilon = " << format_number(m.signals.epsilon) << '\n'
      << "lambda = " << format_number(m.calib.lambda) << '\n'
      << "risk_level = " << format_number(m.calib.risk_level) << '\n'
      << "budget = " << format_number(m.calib.budget) << '\n'
      << "warmup_steps = " << m.calib.warmup_steps << '\n'
      << "quantile_step = " << format_number(m.calib.quantile_step) << '\n'
      << "burst_window = " << m.calib.burst_window << '\n'
      << "l2 = " << format_number(cfg.fit.l2) << '\n'
      << "max_iters = " << cfg.fit.max_iters << '\n'
      << "tol = " << format_number(cfg.fit.tol) << '\n'
      << "class_balance = " << (cfg.fit.class_balance ? "true" : "false") << '\n'
      << "m = " << cfg.eval.window_m << '\n'
      << "ece_bins = " << cfg.eval.ece_bins << '\n'
      << "eval_id_steps = " << cfg.eval.id_reference_steps << '\n';
  return out.str();
}

void write_params(const std::string& path, const CombinerParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "w = ";
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    if (i) out << ',';
    out << full_precision(params.weights[i]);
  }
  out << "\nb = " << full_precision(params.bias) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

CombinerParams read_params(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  const auto w = kv.get("w");
  const auto b = kv.get("b");
  if (!w || !b) throw ConfigError(path + ": params file needs 'w' and 'b'");
  const auto items = split_list(*w);
  if (items.size() != 4) throw ConfigError(path + ": 'w' must have 4 entries");
  CombinerParams p;
  for (std::size_t i = 0; i < 4; ++i) p.weights[i] = to_double("w", items[i]);
  p.bias = to_double("b", *b);
  return p;
}

GenSpec parse_gen_spec(const KeyValueFile& kv, std::optional<std::uint64_t> seed_override) {
  static const std::set<std::string> known{"L", "d", "id_accuracy", "class_dwell", "seed",
                                           "segment"};
  for (const auto& [k, v] : kv.entries()) {
    if (!known.contains(k)) throw ConfigError("unknown spec key '" + k + "'");
  }
  GenSpec spec;
  if (auto v = kv.get("L")) spec.model.classes = to_uint("L", *v);
  if (auto v = kv.get("d")) spec.model.feature_dim = to_uint("d", *v);
  if (auto v = kv.get("id_accuracy")) spec.model.id_accuracy = to_double("id_accuracy", *v);
  if (auto v = kv.get("class_dwell")) spec.model.class_dwell = to_double("class_dwell", *v);
  if (auto v = kv.get("seed")) spec.seed = to_uint("seed", *v);
  if (seed_override) spec.seed = *seed_override;

  const auto segments = kv.get_all("segment");
  if (segments.empty()) throw ConfigError("spec needs at least one 'segment'");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    std::istringstream ss(segments[i]);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    const std::string where = "segment " + std::to_string(i);
    if (tok.size() < 2) throw ConfigError(where + ": expected '<kind> <length> ...'");
    SegmentSpec seg;
    seg.seed = spec.seed * 1000 + i;
    if (tok[0] == "ID") {
      seg.kind = SegmentKind::kID;
    } else if (tok[0] == "CID") {
      seg.kind = SegmentKind::kCID;
    } else if (tok[0] == "OOD") {
      seg.kind = SegmentKind::kOOD;
    } else {
      throw ConfigError(where + ": unknown kind '" + tok[0] + "'");
    }
    seg.length = to_uint(where + " length", tok[1]);
    std::size_t next = 2;
    if (seg.kind == SegmentKind::kCID) {
      if (tok.size() < 3) throw ConfigError(where + ": CID needs a severity");
      seg.severity = static_cast<int>(to_uint(where + " severity", tok[2]));
      next = 3;
    }
    for (; next < tok.size(); ++next) {
      if (tok[next].rfind("seed=", 0) != 0) {
        throw ConfigError(where + ": unexpected token '" + tok[next] + "'");
      }
      seg.seed = to_uint(where + " seed", tok[next].substr(5));
    }
    try {
      seg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    spec.segments.push_back(seg);
  }
  try {
    spec.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

}  // namespace tempconf
