#pragma once

// The `alcrowd` command line: preprocess, qc, train, simulate, synth, report.
// Machine-readable JSON goes to `out`, logs and errors to `err`.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "alcrowd/corpus.hpp"
#include "alcrowd/crowd_qc.hpp"
#include "alcrowd/error.hpp"
#include "alcrowd/io.hpp"
#include "alcrowd/learners.hpp"
#include "alcrowd/simulator.hpp"
#include "alcrowd/strategies.hpp"
#include "alcrowd/synth.hpp"

namespace alcrowd::cli {

namespace fs = std::filesystem;
using io::Json;

struct PreprocessOptions {
  std::string input;
  std::string output;
};

inline int cmd_preprocess(const PreprocessOptions& opt, std::ostream& out, std::ostream& err) {
  auto docs = corpus::read_dataset(opt.input);
  corpus::FilterStats stats;
  const auto kept = corpus::dedupe_and_filter(docs, &stats);
  io::write_atomic(opt.output, corpus::dataset_to_jsonl(kept));
  err << "preprocess: wrote " << stats.written << " of " << stats.read << " records to " << opt.output << "\n";
  out << Json{{"read", stats.read},
              {"deduped", stats.deduped},
              {"dropped_non_english", stats.dropped_non_english},
              {"written", stats.written}}
             .dump()
      << "\n";
  return 0;
}

struct QcOptions {
  std::string assignments;
  std::string responses;
  std::string gold;
  std::string out_dir;
  double min_duration_s = 47.0;
  bool no_controls = false;
  std::vector<std::size_t> fleiss_k{3, 5};
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double cutoff_max = 300.0;
  double cutoff_step = 10.0;
};

inline int cmd_qc(const QcOptions& opt, std::ostream& out, std::ostream& err) {
  const auto assignments = qc::read_assignments(opt.assignments);
  const auto responses = qc::read_responses(opt.responses);
  const auto expert = qc::read_gold(opt.gold);

  std::vector<std::string> breaks;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& r = responses[i];
    auto it = assignments.find(r.assignment_id);
    if (it == assignments.end()) {
      breaks.push_back("response " + std::to_string(i + 1) + " (worker " + r.worker_id + "): unknown assignment " +
                       r.assignment_id);
      continue;
    }
    try {
      qc::check_response(r, it->second);
    } catch (const Error& e) {
      breaks.push_back("response " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (!breaks.empty()) {
    for (const auto& b : breaks) err << "qc: " << b << "\n";
    err << "qc: " << breaks.size() << " referential error(s)\n";
    return 1;
  }

  const qc::ValidationPolicy policy{opt.min_duration_s, !opt.no_controls};
  std::vector<qc::WorkerResponse> valid, control_ok;
  std::map<std::string, std::size_t> verdict_counts;
  Json verdicts = Json::array();
  for (const auto& r : responses) {
    const auto& spec = assignments.at(r.assignment_id);
    const auto v = qc::validate_response(r, spec, policy);
    ++verdict_counts[std::string(qc::to_string(v))];
    verdicts.push_back({{"assignment_id", r.assignment_id},
                        {"worker_id", r.worker_id},
                        {"duration_s", r.duration_s},
                        {"verdict", qc::to_string(v)}});
    if (v == qc::Verdict::Ok) valid.push_back(r);
    const auto controls_only = qc::validate_response(r, spec, {0.0, policy.require_controls});
    if (controls_only == qc::Verdict::Ok) control_ok.push_back(r);
  }

  const auto consensus = qc::consensus_labels(valid, assignments);
  const auto gold = qc::resolve_gold(expert, consensus);
  Json consensus_json = Json::object();
  Json unresolved = Json::array();
  for (const auto& [item, label] : consensus) {
    consensus_json[item] = label ? Json(*label) : Json("UNRESOLVED");
    if (!label) unresolved.push_back(item);
  }
  Json worker_kappa = Json::object();
  for (const auto& [w, k] : qc::per_worker_kappa(valid, assignments, gold)) worker_kappa[w] = k;

  // Valid non-control answers per item, in response-file order.
  std::map<std::string, std::vector<int>> per_item;
  for (const auto& r : valid) {
    const auto& spec = assignments.at(r.assignment_id);
    for (const auto& [item, a] : r.answers)
      if (!spec.is_control(item)) per_item[item].push_back(a);
  }
  Json fleiss = Json::array();
  for (auto k : opt.fleiss_k) {
    std::vector<std::vector<int>> rows;
    for (const auto& [item, answers] : per_item)
      if (answers.size() >= k) rows.push_back(answers);
    Json entry = {{"k", k}, {"items", rows.size()}};
    if (rows.size() < 2) {
      entry["kappa"] = nullptr;
      entry["note"] = "fewer than 2 items with at least k valid responses";
    } else {
      const auto rel = qc::worker_subset_reliability(rows, k, opt.trials, derive_seed(opt.seed, {k}));
      entry["kappa"] = rel.mean;
      entry["ci_low"] = rel.lower;
      entry["ci_high"] = rel.upper;
      entry["trials"] = rel.trials;
    }
    fleiss.push_back(entry);
  }

  std::vector<double> cutoffs;
  if (!(opt.cutoff_step > 0)) throw Error("--cutoff-step must be > 0");
  for (double c = 0.0; c <= opt.cutoff_max + 1e-9; c += opt.cutoff_step) cutoffs.push_back(c);
  auto sweep = qc::cutoff_sweep(control_ok, assignments, gold, cutoffs, qc::CutoffDirection::Lower);
  auto upper = qc::cutoff_sweep(control_ok, assignments, gold, cutoffs, qc::CutoffDirection::Upper);
  sweep.insert(sweep.end(), upper.begin(), upper.end());
  Json sweep_json = Json::array();
  for (const auto& row : sweep)
    sweep_json.push_back({{"cutoff_s", row.cutoff_s},
                          {"direction", qc::to_string(row.direction)},
                          {"n_retained", row.n_retained},
                          {"mean_kappa", row.mean_kappa ? Json(*row.mean_kappa) : Json(nullptr)}});

  Json gold_json = Json::object();
  std::string gold_lines;
  for (const auto& [item, label] : gold) {
    gold_json[item] = label;
    gold_lines += Json{{"id", item}, {"label", label}}.dump() + "\n";
  }

  const Json report = {{"policy", {{"min_duration_s", policy.min_duration_s}, {"require_controls", policy.require_controls}}},
                       {"responses", responses.size()},
                       {"valid_responses", valid.size()},
                       {"verdict_counts", verdict_counts},
                       {"verdicts", verdicts},
                       {"consensus", consensus_json},
                       {"unresolved_items", unresolved},
                       {"gold", gold_json},
                       {"worker_kappa", worker_kappa},
                       {"fleiss", fleiss},
                       {"sweep", sweep_json}};
  const fs::path dir(opt.out_dir);
  io::write_atomic(dir / "qc_report.json", report.dump(2) + "\n");
  io::write_atomic(dir / "sweep.csv", qc::sweep_to_csv(sweep));
  io::write_atomic(dir / "gold.jsonl", gold_lines);
  err << "qc: " << valid.size() << " of " << responses.size() << " responses valid; reports in " << opt.out_dir << "\n";
  out << Json{{"responses", responses.size()},
              {"valid_responses", valid.size()},
              {"verdict_counts", verdict_counts},
              {"unresolved_items", unresolved.size()},
              {"fleiss", fleiss}}
             .dump()
      << "\n";
  return 0;
}

// Flags shared by train and simulate; unset flags fall back to the config file.
struct ExperimentFlags {
  std::string config;
  std::string dataset;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats, train_size, test_size, seed_size, batch_size;
  std::optional<unsigned> threads;
  std::vector<std::string> strategies, learners;
  std::optional<std::string> metric;
  bool fixed_split = false;
};

inline simulator::ExperimentConfig resolve_config(const ExperimentFlags& f, bool require_seed,
                                                  bool* learners_given = nullptr) {
  simulator::ExperimentConfig cfg;
  bool seed_from_config = false;
  if (learners_given) *learners_given = !f.learners.empty();
  if (!f.config.empty()) {
    Json j;
    try {
      j = Json::parse(io::read_file(f.config));
    } catch (const Json::parse_error& e) {
      throw Error(f.config + ": invalid JSON: " + e.what());
    }
    try {
      cfg = simulator::config_from_json(j);
    } catch (const Json::exception& e) {
      throw Error(f.config + ": " + e.what());
    }
    seed_from_config = j.contains("master_seed");
    if (learners_given && j.contains("learners")) *learners_given = true;
  }
  if (!f.dataset.empty()) cfg.dataset_path = f.dataset;
  if (f.seed) cfg.master_seed = *f.seed;
  if (require_seed && !f.seed && !seed_from_config)
    throw Error("--seed is required (or set master_seed in the config file)");
  if (f.repeats) cfg.repeats = *f.repeats;
  if (f.train_size) cfg.train_size = *f.train_size;
  if (f.test_size) cfg.test_size = *f.test_size;
  if (f.seed_size) cfg.seed_size = *f.seed_size;
  if (f.batch_size) cfg.batch_size = *f.batch_size;
  if (f.threads) cfg.threads = *f.threads;
  if (f.metric) cfg.metric = simulator::parse_metric(*f.metric);
  if (f.fixed_split) cfg.fixed_split = true;
  if (!f.strategies.empty()) {
    cfg.strategies.clear();
    for (const auto& s : f.strategies) cfg.strategies.push_back(strategies::parse_strategy(s));
  }
  if (!f.learners.empty()) {
    cfg.learners.clear();
    for (const auto& l : f.learners) cfg.learners.push_back(simulator::LearnerSpec::parse(l));
  }
  if (cfg.dataset_path.empty()) throw Error("no dataset: pass --dataset or set dataset_path in the config");
  return cfg;
}

inline int cmd_train(const ExperimentFlags& flags, std::ostream& out, std::ostream& err) {
  bool learners_given = false;
  auto cfg = resolve_config(flags, false, &learners_given);
  std::vector<learners::LearnerKind> kinds;
  if (!learners_given) {
    kinds = {learners::LearnerKind::LR, learners::LearnerKind::NB, learners::LearnerKind::RF, learners::LearnerKind::SVM};
  } else {
    for (const auto& l : cfg.learners) {
      if (l.is_committee()) throw Error("train benchmarks single learners, not committee '" + l.name() + "'");
      kinds.push_back(l.members.front());
    }
  }
  const auto docs = corpus::read_dataset(cfg.dataset_path);
  err << "train: " << docs.size() << " documents, " << cfg.repeats << " repeat(s)\n";
  const auto rows = simulator::benchmark_learners(docs, cfg, kinds);

  std::string csv = "learner,precision,recall,f1_pos,f1_weighted,ci_low,ci_high\n";
  Json results = Json::array();
  for (const auto& row : rows) {
    const auto name = std::string(learners::to_string(row.learner));
    csv += name + ',' + io::fmt_double(row.mean.precision) + ',' + io::fmt_double(row.mean.recall) + ',' +
           io::fmt_double(row.mean.f1_pos) + ',' + io::fmt_double(row.mean.f1_weighted) + ',' +
           io::fmt_double(row.ci.lower) + ',' + io::fmt_double(row.ci.upper) + '\n';
    Json runs = Json::array();
    for (std::size_t r = 0; r < row.runs.size(); ++r)
      runs.push_back({{"repeat", r},
                      {"seed", row.seeds[r]},
                      {"vocab_size", row.vocab_sizes[r]},
                      {"metrics", learners::metrics_to_json(row.runs[r])}});
    results.push_back({{"kind", name},
                       {"hyperparameters", learners::hyperparams_to_json(row.learner, cfg.hyperparams)},
                       {"mean", learners::metrics_to_json(row.mean)},
                       {"ci_metric", simulator::to_string(cfg.metric)},
                       {"ci_low", row.ci.lower},
                       {"ci_high", row.ci.upper},
                       {"ci_degenerate", row.ci_degenerate},
                       {"runs", runs}});
  }
  const Json report = {{"config", simulator::config_to_json(cfg)}, {"learners", results}};
  const fs::path dir(flags.out_dir);
  io::write_atomic(dir / "train.json", report.dump(2) + "\n");
  io::write_atomic(dir / "train.csv", csv);
  Json summary = Json::array();
  for (const auto& row : rows)
    summary.push_back({{"learner", learners::to_string(row.learner)},
                       {"f1_pos", row.mean.f1_pos},
                       {"f1_weighted", row.mean.f1_weighted},
                       {"ci_low", row.ci.lower},
                       {"ci_high", row.ci.upper}});
  out << summary.dump() << "\n";
  return 0;
}

inline int cmd_simulate(const ExperimentFlags& flags, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(flags, true);
  simulator::check_config(cfg);  // arity errors surface before any data is read
  const auto docs = corpus::read_dataset(cfg.dataset_path);
  err << "simulate: " << docs.size() << " documents, " << cfg.repeats << " repeat(s)\n";
  const auto result = simulator::run_experiment(docs, cfg);
  const auto summaries = simulator::summaries_to_json(result.summaries, cfg.metric, cfg.target_fraction);
  const Json summary = {{"config", simulator::config_to_json(cfg)},
                        {"excluded_unlabeled", result.excluded_unlabeled},
                        {"committee_evaluation", "majority vote of members"},
                        {"strategies", summaries}};
  const fs::path dir(flags.out_dir);
  io::write_atomic(dir / "curve.csv", simulator::curve_to_csv(result.cells));
  io::write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  Json brief = Json::array();
  for (const auto& s : result.summaries)
    brief.push_back({{"strategy", s.strategy},
                     {"learner", s.learner},
                     {"labels_to_target", s.labels_to_target ? Json(*s.labels_to_target) : Json("not reached")},
                     {"auc", s.auc},
                     {"full_pool_mean", s.full_value}});
  out << brief.dump() << "\n";
  return 0;
}

struct SynthOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_docs, class_vocab, background_vocab, class_tokens, background_tokens;
  std::optional<double> balance, signal, noise;
};

inline int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err) {
  simulator::SynthSpec spec;
  bool seed_from_config = false;
  if (!opt.config.empty()) {
    const Json j = Json::parse(io::read_file(opt.config));
    static const std::set<std::string> known{"n_docs", "class_vocab", "background_vocab", "class_balance", "signal",
                                             "noise", "class_tokens", "background_tokens", "seed"};
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw Error("unknown synth config field \"" + key + "\"");
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("n_docs", spec.n_docs);
    get("class_vocab", spec.class_vocab);
    get("background_vocab", spec.background_vocab);
    get("class_balance", spec.class_balance);
    get("signal", spec.signal);
    get("noise", spec.noise);
    get("class_tokens", spec.class_tokens);
    get("background_tokens", spec.background_tokens);
    get("seed", spec.seed);
    seed_from_config = j.contains("seed");
  }
  if (!opt.seed && !seed_from_config) throw Error("--seed is required");
  if (opt.seed) spec.seed = *opt.seed;
  if (opt.n_docs) spec.n_docs = *opt.n_docs;
  if (opt.class_vocab) spec.class_vocab = *opt.class_vocab;
  if (opt.background_vocab) spec.background_vocab = *opt.background_vocab;
  if (opt.class_tokens) spec.class_tokens = *opt.class_tokens;
  if (opt.background_tokens) spec.background_tokens = *opt.background_tokens;
  if (opt.balance) spec.class_balance = *opt.balance;
  if (opt.signal) spec.signal = *opt.signal;
  if (opt.noise) spec.noise = *opt.noise;
  const auto docs = simulator::generate_synthetic_corpus(spec);
  io::write_atomic(opt.out, corpus::dataset_to_jsonl(docs));
  err << "synth: wrote " << docs.size() << " documents to " << opt.out << "\n";
  out << simulator::spec_to_json(spec).dump() << "\n";
  return 0;
}

struct ReportOptions {
  std::string curve;
  std::string out_dir;
  std::string metric = "f1_pos";
  double target = 0.95;
};

inline int cmd_report(const ReportOptions& opt, std::ostream& out, std::ostream& err) {
  const auto metric = simulator::parse_metric(opt.metric);
  if (!(opt.target > 0.0 && opt.target <= 1.0)) throw Error("--target must be in (0, 1]");
  const auto cells = simulator::read_curve_csv(opt.curve);
  if (cells.empty()) throw Error(opt.curve + ": no data rows");
  const auto summaries = simulator::summarize_strategies(cells, metric, opt.target);
  const auto json = simulator::summaries_to_json(summaries, metric, opt.target);
  const fs::path dir(opt.out_dir);
  io::write_atomic(dir / "report.json", Json{{"strategies", json}}.dump(2) + "\n");
  io::write_atomic(dir / "plot.csv", simulator::summaries_to_plot_csv(summaries));
  err << "report: " << summaries.size() << " strategy/learner pair(s)\n";
  Json brief = Json::array();
  for (const auto& s : summaries)
    brief.push_back({{"strategy", s.strategy},
                     {"learner", s.learner},
                     {"labels_to_target", s.labels_to_target ? Json(*s.labels_to_target) : Json("not reached")},
                     {"auc", s.auc}});
  out << brief.dump() << "\n";
  return 0;
}

// Parses argv-style arguments (without the program name) and runs one subcommand.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Crowdsourced annotation QC and pool-based active-learning simulation", "alcrowd"};
  app.require_subcommand(1, 1);

  PreprocessOptions pre;
  auto* p = app.add_subcommand("preprocess", "Normalize, deduplicate and language-filter a dataset");
  p->add_option("--input", pre.input, "Input JSON-lines dataset")->required();
  p->add_option("--output", pre.output, "Output JSON-lines dataset")->required();

  QcOptions qopt;
  auto* q = app.add_subcommand("qc", "Validate crowd responses, build consensus labels and agreement reports");
  q->add_option("--assignments", qopt.assignments, "Assignments JSON-lines file")->required();
  q->add_option("--responses", qopt.responses, "Worker responses JSON-lines file")->required();
  q->add_option("--gold", qopt.gold, "Expert labels JSON-lines file")->required();
  q->add_option("--out-dir", qopt.out_dir, "Directory for report files")->required();
  q->add_option("--min-duration", qopt.min_duration_s, "Minimum valid duration in seconds")->capture_default_str();
  q->add_flag("--no-controls", qopt.no_controls, "Do not require correct control answers");
  q->add_option("--fleiss-k", qopt.fleiss_k, "Worker counts for Fleiss' kappa reliability")->capture_default_str();
  q->add_option("--trials", qopt.trials, "Random subsets per worker count")->capture_default_str();
  q->add_option("--seed", qopt.seed, "Seed for worker-subset sampling")->capture_default_str();
  q->add_option("--cutoff-max", qopt.cutoff_max, "Largest sweep cut-off in seconds")->capture_default_str();
  q->add_option("--cutoff-step", qopt.cutoff_step, "Sweep cut-off step in seconds")->capture_default_str();

  auto add_experiment_flags = [](CLI::App* sub, ExperimentFlags& f) {
    sub->add_option("--config", f.config, "JSON experiment config");
    sub->add_option("--dataset", f.dataset, "Dataset JSON-lines file (overrides dataset_path)");
    sub->add_option("--out-dir", f.out_dir, "Directory for output files")->required();
    sub->add_option("--seed", f.seed, "Master seed (overrides master_seed)");
    sub->add_option("--repeats", f.repeats, "Repeats");
    sub->add_option("--train-size", f.train_size, "Train split size");
    sub->add_option("--test-size", f.test_size, "Test split size");
    sub->add_option("--learners", f.learners, "Learners: lr nb rf svm, or committees such as lr+rf+svm");
    sub->add_option("--metric", f.metric, "f1_pos or f1_weighted");
    sub->add_option("--threads", f.threads, "Worker threads (0 = ALCROWD_THREADS or all cores)");
    sub->add_flag("--fixed-split", f.fixed_split, "Use one split for every repeat");
  };
  ExperimentFlags train_flags;
  auto* t = app.add_subcommand("train", "Benchmark LR, NB, RF and SVM on a train/test split");
  add_experiment_flags(t, train_flags);

  ExperimentFlags sim_flags;
  auto* s = app.add_subcommand("simulate", "Run pool-based active-learning simulations");
  add_experiment_flags(s, sim_flags);
  s->add_option("--seed-size", sim_flags.seed_size, "Initial labelled set size");
  s->add_option("--batch-size", sim_flags.batch_size, "Documents queried per iteration");
  s->add_option("--strategies", sim_flags.strategies,
                "random least_confident entropy vote_entropy kl_divergence");

  SynthOptions sopt;
  auto* y = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  y->add_option("--config", sopt.config, "JSON synth spec");
  y->add_option("--out", sopt.out, "Output JSON-lines dataset")->required();
  y->add_option("--seed", sopt.seed, "Seed (required)");
  y->add_option("--n-docs", sopt.n_docs, "Number of documents");
  y->add_option("--class-vocab", sopt.class_vocab, "Indicative tokens per class");
  y->add_option("--background-vocab", sopt.background_vocab, "Background tokens");
  y->add_option("--class-tokens", sopt.class_tokens, "Class-token slots per document");
  y->add_option("--background-tokens", sopt.background_tokens, "Background-token slots per document");
  y->add_option("--balance", sopt.balance, "Probability of label 1");
  y->add_option("--signal", sopt.signal, "Probability a class slot uses the document's own class");
  y->add_option("--noise", sopt.noise, "Label flip probability");

  ReportOptions ropt;
  auto* r = app.add_subcommand("report", "Summarize a learning-curve CSV by strategy");
  r->add_option("--curve", ropt.curve, "Learning-curve CSV from simulate")->required();
  r->add_option("--out-dir", ropt.out_dir, "Directory for report files")->required();
  r->add_option("--metric", ropt.metric, "f1_pos or f1_weighted")->capture_default_str();
  r->add_option("--target", ropt.target, "Target fraction of the full-pool score")->capture_default_str();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*p) return cmd_preprocess(pre, out, err);
    if (*q) return cmd_qc(qopt, out, err);
    if (*t) return cmd_train(train_flags, out, err);
    if (*s) return cmd_simulate(sim_flags, out, err);
    if (*y) return cmd_synth(sopt, out, err);
    if (*r) return cmd_report(ropt, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace alcrowd::cli
