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

#include "cli.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tempconf/config.hpp"
#include "tempconf/evaluation.hpp"
#include "tempconf/fitting.hpp"
#include "tempconf/monitor.hpp"
#include "tempconf/stream_io.hpp"
#include "tempconf/streamgen.hpp"

namespace tempconf::cli {
namespace {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string input;
  std::string decisions;
  std::string config;
  std::string params;
  std::string id_stream;
  std::string out;
  bool quantized = false;
  std::optional<std::uint64_t> seed;
};

RunConfig run_config(const Options& opt) {
  return opt.config.empty() ? RunConfig{} : load_run_config(opt.config);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path);
}

// Key/value record of everything that determines a run's outputs.
class Manifest {
 public:
  explicit Manifest(const std::string& command) {
    set("tool", "tempconf");
    set("version", TEMPCONF_VERSION);
    set("command", command);
  }

  void set(const std::string& key, const std::string& value) {
    text_ += key + " = " + value + '\n';
  }

  void config(const Options& opt, const RunConfig& cfg) {
    set("config_file", opt.config.empty() ? "(defaults)" : opt.config);
    std::istringstream lines(config_snapshot(cfg));
    for (std::string line; std::getline(lines, line);) text_ += "config." + line + '\n';
  }

  void write_beside(const std::string& output) const {
    write_text(output + ".manifest", "# tempconf run manifest\n" + text_);
  }

 private:
  std::string text_;
};

const char* kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::kID:
      return "ID";
    case SegmentKind::kCID:
      return "CID";
    case SegmentKind::kOOD:
      return "OOD";
  }
  return "?";
}

int cmd_gen(const Options& opt, std::ostream& out) {
  const GenSpec spec = parse_gen_spec(KeyValueFile::load(opt.input), opt.seed);
  const auto records = generate(spec.segments, spec.model);
  write_stream(opt.out, StreamHeader{kStreamFormatVersion, spec.model.classes,
                                     spec.model.feature_dim},
               records);

  Manifest m("gen");
  m.set("generator", opt.input);
  m.set("output", opt.out);
  m.set("seed", std::to_string(spec.seed));
  m.set("L", std::to_string(spec.model.classes));
  m.set("d", std::to_string(spec.model.feature_dim));
  m.set("id_accuracy", format_number(spec.model.id_accuracy));
  m.set("class_dwell", format_number(spec.model.class_dwell));
  for (const auto& s : spec.segments) {
    std::string seg = std::string(kind_name(s.kind)) + ' ' + std::to_string(s.length);
    if (s.kind == SegmentKind::kCID) seg += ' ' + std::to_string(s.severity);
    m.set("segment", seg + " seed=" + std::to_string(s.seed));
  }
  m.write_beside(opt.out);
  out << "wrote " << records.size() << " records to " << opt.out << '\n';
  return kExitOk;
}

int cmd_fit(const Options& opt, std::ostream& out) {
  const RunConfig cfg = run_config(opt);
  const auto records = read_stream(opt.input);
  if (records.empty()) throw ValidationError("development stream is empty");
  const auto examples = collect_dev_examples(records, cfg.monitor.window, cfg.monitor.signals);
  if (examples.empty()) {
    throw ValidationError("development stream has no labeled in-distribution records");
  }
  const FitResult fit = fit_combiner_detailed(examples, cfg.fit);
  write_params(opt.out, fit.params);
  const CombinerEval diag = eval_combiner(fit.params, examples, cfg.fit.class_balance);

  Manifest m("fit");
  m.set("input", opt.input);
  m.set("output", opt.out);
  m.config(opt, cfg);
  m.write_beside(opt.out);

  out << "examples " << examples.size() << '\n'
      << "log_loss " << format_number(diag.log_loss) << '\n'
      << "accuracy " << format_number(diag.accuracy) << '\n'
      << "iterations " << fit.iterations << '\n'
      << "converged " << (fit.converged ? "true" : "false") << '\n';
  return kExitOk;
}

int cmd_monitor(const Options& opt, std::ostream& out) {
  const RunConfig cfg = run_config(opt);
  const CombinerParams params = read_params(opt.params);
  StreamReader reader(opt.input);
  const StreamHeader header = reader.header();
  Monitor monitor(cfg.monitor, params, header.classes, header.feature_dim, opt.quantized);

  std::vector<DecisionRecord> decisions;
  std::size_t abstained = 0;
  std::size_t scored = 0;
  while (auto rec = reader.next()) {
    StepResult r;
    try {
      r = monitor.step(rec->posterior, rec->feature);
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what(), reader.records_read() - 1);
    }
    if (!r.decision.warmup) {
      ++scored;
      abstained += r.decision.abstained() ? 1 : 0;
    }
    decisions.push_back(DecisionRecord{rec->t, r.decision, r.uncertainty, r.signals});
  }
  write_decisions(opt.out, decisions);

  Manifest m("monitor");
  m.set("input", opt.input);
  m.set("params", opt.params);
  m.set("output", opt.out);
  m.set("quantized", opt.quantized ? "true" : "false");
  m.config(opt, cfg);
  m.write_beside(opt.out);

  out << "steps " << decisions.size() << '\n' << "abstentions " << abstained << '\n';
  if (scored > 0) {
    out << "abstain_rate " << format_number(double(abstained) / double(scored)) << '\n';
  }
  return kExitOk;
}

void write_pr(const std::string& path, std::span<const PrPoint> curve) {
  std::ostringstream s;
  s << "threshold\ttp\tfp\ttn\tfn\tprecision\trecall\n";
  for (const auto& p : curve) {
    s << format_number(p.threshold) << '\t' << p.counts.tp << '\t' << p.counts.fp << '\t'
      << p.counts.tn << '\t' << p.counts.fn << '\t' << format_number(p.precision()) << '\t'
      << format_number(p.recall()) << '\n';
  }
  write_text(path, s.str());
}

void write_roc(const std::string& path, std::span<const RocPoint> curve) {
  std::ostringstream s;
  s << "fpr\ttpr\n";
  for (const auto& p : curve) s << format_number(p.fpr) << '\t' << format_number(p.tpr) << '\n';
  write_text(path, s.str());
}

// AUROC/AUPRC of `scores` for a binary split, plus point files.
void failure_detection(MetricsReport& rep, const std::string& name, const std::string& out,
                       const std::vector<double>& scores, const std::vector<bool>& positive) {
  std::size_t pos = 0;
  for (bool p : positive) pos += p ? 1 : 0;
  if (pos == 0 || pos == positive.size()) {
    rep.skip(name + "_auroc", "needs both outcomes");
    rep.skip(name + "_auprc", "needs both outcomes");
    return;
  }
  rep.add(name + "_auroc", auroc(scores, positive));
  const auto pr = score_pr_curve(scores, positive);
  rep.add(name + "_auprc", auprc(pr));
  write_roc(out + "." + name + "_roc.tsv", roc_curve(scores, positive));
  write_pr(out + "." + name + "_pr.tsv", pr);
}

void drop_detection(MetricsReport& rep, const Options& opt, const RunConfig& cfg,
                    std::span<const Outcome> outcomes, const std::vector<double>& monitor,
                    const std::vector<double>& maxprob, bool labeled) {
  const std::size_t m = cfg.eval.window_m;
  const char* names[] = {"drop_auprc_monitor", "drop_auprc_maxprob", "median_detection_delay"};
  auto skip_all = [&](const std::string& why) {
    for (const char* n : names) rep.skip(n, why);
  };
  if (!labeled) return skip_all("unlabeled");

  IDBand band;
  if (!opt.id_stream.empty()) {
    band = id_band(outcomes_of(read_stream(opt.id_stream)), m);
  } else {
    const std::size_t n = std::min(cfg.eval.id_reference_steps, outcomes.size());
    try {
      band = id_band(outcomes.first(n), m);
    } catch (const std::invalid_argument& e) {
      return skip_all(std::string("no ID reference: ") + e.what());
    }
  }
  rep.add("id_band_mu", band.mu);
  rep.add("id_band_sigma", band.sigma);

  const auto steps_t = drop_detection_steps(outcomes, band, m, monitor);
  const auto steps_b = drop_detection_steps(outcomes, band, m, maxprob);
  std::uint64_t events = 0;
  for (const auto& s : steps_t) events += s.event ? 1 : 0;
  rep.add_count("drop_event_steps", events);
  if (events == 0) return skip_all(NoPositiveEvents().what());

  const auto curve_t = drop_pr_curve(steps_t);
  const auto curve_b = drop_pr_curve(steps_b);
  rep.add("drop_auprc_monitor", auprc(curve_t));
  rep.add("drop_auprc_maxprob", auprc(curve_b));
  write_pr(opt.out + ".drop_pr_monitor.tsv", curve_t);
  write_pr(opt.out + ".drop_pr_maxprob.tsv", curve_b);

  const double rho = best_f1_threshold(curve_t);
  rep.add("drop_best_f1_rho", rho);
  if (const auto delay = median_detection_delay(steps_t, rho)) {
    rep.add("median_detection_delay", *delay);
  } else {
    rep.skip("median_detection_delay", "no event onset detected");
  }
}

int cmd_eval(const Options& opt, std::ostream& out) {
  const RunConfig cfg = run_config(opt);
  const auto records = read_stream(opt.input);
  const auto decisions = read_decisions(opt.decisions);
  if (records.size() != decisions.size()) {
    throw ValidationError("decisions file has " + std::to_string(decisions.size()) +
                          " records but the stream has " + std::to_string(records.size()));
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].t != decisions[i].t) {
      throw ValidationError("decision " + std::to_string(i) + " is for step " +
                            std::to_string(decisions[i].t) + ", stream has step " +
                            std::to_string(records[i].t));
    }
  }

  const std::size_t n = records.size();
  const auto outcomes = outcomes_of(records);
  std::vector<double> monitor(n);
  std::vector<double> maxprob(n);
  for (std::size_t i = 0; i < n; ++i) {
    monitor[i] = 1.0 - decisions[i].decision.score;
    maxprob[i] = max_confidence(records[i].posterior);
  }

  MetricsReport rep;
  rep.add_count("steps", n);
  std::size_t labeled = 0;
  std::size_t ood = 0;
  for (const auto& r : records) {
    labeled += r.has_class_label() ? 1 : 0;
    ood += r.is_ood() ? 1 : 0;
  }
  rep.add_count("labeled_steps", labeled);
  rep.add_count("ood_steps", ood);

  drop_detection(rep, opt, cfg, outcomes, monitor, maxprob, labeled > 0);

  // Failure detection on labeled ID steps (positive = wrong prediction).
  if (labeled == 0) {
    rep.skip("err_auroc", "unlabeled");
    rep.skip("err_auprc", "unlabeled");
  } else {
    std::vector<double> scores;
    std::vector<bool> wrong;
    for (std::size_t i = 0; i < n; ++i) {
      if (outcomes[i] == Outcome::kUnlabeled) continue;
      scores.push_back(decisions[i].decision.score);
      wrong.push_back(outcomes[i] == Outcome::kWrong);
    }
    failure_detection(rep, "err", opt.out, scores, wrong);
  }

  // Correct ID steps against OOD steps (positive = OOD).
  if (ood == 0) {
    rep.skip("ood_auroc", "no OOD records");
    rep.skip("ood_auprc", "no OOD records");
  } else if (labeled == 0) {
    rep.skip("ood_auroc", "unlabeled");
    rep.skip("ood_auprc", "unlabeled");
  } else {
    std::vector<double> scores;
    std::vector<bool> is_ood;
    for (std::size_t i = 0; i < n; ++i) {
      if (!records[i].is_ood() && outcomes[i] != Outcome::kCorrect) continue;
      scores.push_back(decisions[i].decision.score);
      is_ood.push_back(records[i].is_ood());
    }
    failure_detection(rep, "ood", opt.out, scores, is_ood);
  }

  if (labeled == 0) {
    for (const char* name : {"brier", "nll", "ece"}) rep.skip(name, "unlabeled");
  } else {
    std::vector<std::vector<double>> posteriors;
    std::vector<Label> labels;
    std::vector<double> conf;
    std::vector<bool> correct;
    for (std::size_t i = 0; i < n; ++i) {
      if (!records[i].has_class_label()) continue;
      posteriors.push_back(records[i].posterior);
      labels.push_back(*records[i].label);
      conf.push_back(maxprob[i]);
      correct.push_back(outcomes[i] == Outcome::kCorrect);
    }
    rep.add("brier", brier(posteriors, labels));
    rep.add("nll", nll(posteriors, labels));
    rep.add("ece", ece(conf, correct, cfg.eval.ece_bins));
  }

  std::vector<Decision> live;
  std::vector<double> r;
  std::vector<double> q;
  for (const auto& d : decisions) {
    if (d.decision.warmup) continue;
    live.push_back(d.decision);
    r.push_back(d.decision.score);
    q.push_back(d.decision.quantile);
  }
  if (live.empty()) {
    for (const char* name : {"exceedance_deviation", "abstain_rate", "budget_deviation",
                             "budget_worst_window"}) {
      rep.skip(name, "no post-warm-up steps");
    }
  } else {
    const auto& calib = cfg.monitor.calib;
    rep.add("exceedance_deviation", exceedance_deviation(r, q, calib.risk_level));
    std::size_t abstained = 0;
    for (const auto& d : live) abstained += d.abstained() ? 1 : 0;
    rep.add("abstain_rate", double(abstained) / double(live.size()));
    const auto adherence = budget_adherence(live, calib.budget, calib.burst_window);
    rep.add("budget_deviation", adherence.longrun);
    rep.add("budget_worst_window", adherence.worst_window);
  }

  const std::string text = rep.str();
  write_text(opt.out, text);

  Manifest m("eval");
  m.set("input", opt.input);
  m.set("decisions", opt.decisions);
  m.set("id_stream", opt.id_stream.empty() ? "(leading steps)" : opt.id_stream);
  m.set("output", opt.out);
  m.config(opt, cfg);
  m.write_beside(opt.out);

  out << text;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tempconf: streaming label-free uncertainty monitor"};
  app.set_version_flag("--version", TEMPCONF_VERSION);
  app.require_subcommand(1);

  Options opt;
  auto add_out = [&](CLI::App* sub, const char* what) {
    sub->add_option("--out", opt.out, what)->required();
  };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Run configuration (key = value file)")
        ->check(CLI::ExistingFile);
  };

  auto* gen = app.add_subcommand("gen", "Generate a synthetic stream from a generator file");
  gen->add_option("generator", opt.input, "Generator file (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--seed", opt.seed, "Override the generator file's base seed");
  add_out(gen, "Output stream file");

  auto* fit = app.add_subcommand("fit", "Fit the combiner on a labeled development stream");
  fit->add_option("stream", opt.input, "Development stream file")->required()->check(
      CLI::ExistingFile);
  add_config(fit);
  add_out(fit, "Output parameter file");

  auto* mon = app.add_subcommand("monitor", "Run the monitor over a stream");
  mon->add_option("stream", opt.input, "Input stream file")->required()->check(CLI::ExistingFile);
  add_config(mon);
  mon->add_option("--params", opt.params, "Combiner parameter file")
      ->required()
      ->check(CLI::ExistingFile);
  mon->add_flag("--quantized", opt.quantized, "Use the 8-bit signal kernels");
  add_out(mon, "Output decisions file");

  auto* ev = app.add_subcommand("eval", "Evaluate decisions against a labeled stream");
  ev->add_option("stream", opt.input, "Stream file")->required()->check(CLI::ExistingFile);
  ev->add_option("decisions", opt.decisions, "Decisions file")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--id-stream", opt.id_stream, "ID reference stream for the accuracy band")
      ->check(CLI::ExistingFile);
  add_config(ev);
  add_out(ev, "Output report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "gen") return cmd_gen(opt, out);
    if (name == "fit") return cmd_fit(opt, out);
    if (name == "monitor") return cmd_monitor(opt, out);
    return cmd_eval(opt, out);
  } catch (const FormatError& e) {
    err << "tempconf " << name << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "tempconf " << name << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    err << "tempconf " << name << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "tempconf " << name << ": error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace tempconf::cli
