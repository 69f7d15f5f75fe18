#pragma once

// Pool-based active-learning experiments: dataset splits, the
// train / evaluate / query / annotate loop, repeat aggregation and
// strategy summaries, plus the one-shot classifier benchmark.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "alcrowd/corpus.hpp"
#include "alcrowd/error.hpp"
#include "alcrowd/io.hpp"
#include "alcrowd/learners.hpp"
#include "alcrowd/parallel.hpp"
#include "alcrowd/rng.hpp"
#include "alcrowd/strategies.hpp"

namespace alcrowd::simulator {

using corpus::Document;
using corpus::SparseVector;
using learners::Hyperparams;
using learners::LearnerKind;
using learners::Metrics;
using strategies::StrategyKind;

enum class Metric { F1Pos, F1Weighted };

inline std::string_view to_string(Metric m) { return m == Metric::F1Pos ? "f1_pos" : "f1_weighted"; }

inline Metric parse_metric(std::string_view s) {
  if (s == "f1_pos") return Metric::F1Pos;
  if (s == "f1_weighted") return Metric::F1Weighted;
  throw Error("unknown metric '" + std::string(s) + "' (expected f1_pos or f1_weighted)");
}

inline double metric_value(const Metrics& m, Metric which) {
  return which == Metric::F1Pos ? m.f1_pos : m.f1_weighted;
}

// A single learner ("lr") or a committee written as members joined by '+'
// ("lr+rf+svm").
struct LearnerSpec {
  std::vector<LearnerKind> members;

  bool is_committee() const { return members.size() > 1; }

  std::string name() const {
    std::string s;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i) s += '+';
      s += learners::to_string(members[i]);
    }
    return s;
  }

  static LearnerSpec parse(std::string_view text) {
    LearnerSpec spec;
    std::size_t start = 0;
    while (true) {
      const auto plus = text.find('+', start);
      spec.members.push_back(learners::parse_learner(text.substr(start, plus - start)));
      if (plus == std::string_view::npos) break;
      start = plus + 1;
    }
    return spec;
  }

  bool operator==(const LearnerSpec&) const = default;
};

struct ExperimentConfig {
  std::string dataset_path;
  std::size_t train_size = 2000;
  std::size_t test_size = 1000;
  std::size_t seed_size = 300;
  std::size_t batch_size = 300;
  std::vector<StrategyKind> strategies{StrategyKind::Random, StrategyKind::LeastConfident,
                                       StrategyKind::Entropy};
  std::vector<LearnerSpec> learners{LearnerSpec{{LearnerKind::LR}}};
  std::size_t repeats = 10;
  std::uint64_t master_seed = 0;
  Metric metric = Metric::F1Pos;
  bool fixed_split = false;
  corpus::VocabParams vocab;
  double target_fraction = 0.95;
  Hyperparams hyperparams;
  unsigned threads = 0;  // 0 = ALCROWD_THREADS or hardware concurrency
};

// ---- splits ----

struct Split {
  std::vector<std::size_t> train, test, remainder;  // indices into the document list, ascending
};

// Disjoint uniform-random train/test/remainder split, deterministic in seed.
inline Split split_dataset(std::size_t n_docs, std::size_t train_size, std::size_t test_size, std::uint64_t seed) {
  if (train_size + test_size > n_docs)
    throw Error("infeasible split: train_size + test_size = " + std::to_string(train_size + test_size) +
                " exceeds " + std::to_string(n_docs) + " documents");
  std::vector<std::size_t> idx(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n_docs; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_size));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_size),
                idx.begin() + static_cast<std::ptrdiff_t>(train_size + test_size));
  s.remainder.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_size + test_size), idx.end());
  for (auto* v : {&s.train, &s.test, &s.remainder}) std::sort(v->begin(), v->end());
  return s;
}

inline Split split_dataset(std::span<const Document> docs, std::size_t train_size, std::size_t test_size,
                           std::uint64_t seed) {
  for (const auto& d : docs)
    if (!d.label) throw Error("document " + d.id + " has no label");
  return split_dataset(docs.size(), train_size, test_size, seed);
}

// ---- seeds ----

inline std::uint64_t split_seed(const ExperimentConfig& cfg, std::size_t repeat) {
  return derive_seed(cfg.master_seed, {tag("split"), cfg.fixed_split ? 0 : repeat});
}
inline std::uint64_t labeled_seed(const ExperimentConfig& cfg, std::size_t repeat) {
  return derive_seed(cfg.master_seed, {tag("seed-set"), repeat});
}
// Independent of strategy and iteration, so equal label sets give equal models.
inline std::uint64_t model_seed(const ExperimentConfig& cfg, std::size_t repeat, std::size_t member, LearnerKind kind) {
  return derive_seed(cfg.master_seed, {tag("model"), repeat, member, static_cast<std::uint64_t>(kind)});
}
inline std::uint64_t query_seed(const ExperimentConfig& cfg, std::size_t repeat, std::size_t iteration) {
  return derive_seed(cfg.master_seed, {tag("query"), repeat, iteration});
}

// ---- per-repeat data ----

// Everything one repeat's cells share: the split, the labelled seed set, the
// vocabulary fitted on seed + pool text, and every document's feature vector.
struct RepeatData {
  std::size_t repeat = 0;
  std::vector<std::string> ids;
  std::vector<int> labels;  // -1 when unlabeled
  std::vector<SparseVector> features;
  std::size_t dim = 0;
  std::vector<std::size_t> test, seed, pool;  // ascending document indices
};

inline RepeatData prepare_repeat(std::span<const Document> docs, const ExperimentConfig& cfg, std::size_t repeat) {
  RepeatData r;
  r.repeat = repeat;
  const Split split = split_dataset(docs.size(), cfg.train_size, cfg.test_size, split_seed(cfg, repeat));
  if (cfg.seed_size > split.train.size())
    throw Error("seed_size " + std::to_string(cfg.seed_size) + " exceeds train_size " +
                std::to_string(split.train.size()));
  Rng rng(labeled_seed(cfg, repeat));
  r.seed = sample_without_replacement<std::size_t>(split.train, cfg.seed_size, rng);
  std::sort(r.seed.begin(), r.seed.end());
  r.test = split.test;
  r.pool = split.remainder;

  std::vector<Document> universe;
  universe.reserve(r.seed.size() + r.pool.size());
  for (auto i : r.seed) universe.push_back(docs[i]);
  for (auto i : r.pool) universe.push_back(docs[i]);
  const auto vocab = corpus::build_vocab(universe, cfg.vocab);
  r.dim = vocab.size();
  r.ids.reserve(docs.size());
  r.labels.reserve(docs.size());
  r.features.resize(docs.size());
  for (const auto& d : docs) {
    r.ids.push_back(d.id);
    r.labels.push_back(d.label ? *d.label : -1);
  }
  for (auto* part : {&r.seed, &r.pool, &r.test})
    for (auto i : *part) r.features[i] = corpus::vectorize(docs[i], vocab);
  return r;
}

// ---- learning curves ----

struct CurveCell {
  std::string strategy;
  std::string learner;
  std::size_t repeat = 0;
  std::size_t iteration = 0;
  std::size_t labels_used = 0;
  Metrics metrics;
};

// A fitted single model or committee.
class Predictor {
 public:
  Predictor(const LearnerSpec& spec, const learners::Examples& data, const ExperimentConfig& cfg, std::size_t repeat) {
    std::vector<learners::TrainedModel> models;
    for (std::size_t m = 0; m < spec.members.size(); ++m)
      models.push_back(learners::fit(spec.members[m], data, cfg.hyperparams,
                                     model_seed(cfg, repeat, m, spec.members[m])));
    if (models.size() == 1) single_.emplace(std::move(models.front()));
    else committee_.emplace(std::move(models));
  }

  int predict(const SparseVector& x) const { return single_ ? single_->predict(x) : committee_->predict(x); }

  double score(StrategyKind kind, const SparseVector& x) const {
    if (strategies::is_committee_strategy(kind)) return strategies::committee_score(kind, *committee_, x);
    return strategies::single_model_score(kind, *single_, x);
  }

 private:
  std::optional<learners::TrainedModel> single_;
  std::optional<strategies::Committee> committee_;
};

inline void check_arity(StrategyKind strategy, const LearnerSpec& learner) {
  if (strategies::is_committee_strategy(strategy) && !learner.is_committee())
    throw Error(std::string(strategies::to_string(strategy)) + " needs a committee of >= 2 learners, got '" +
                learner.name() + "'");
  if ((strategy == StrategyKind::LeastConfident || strategy == StrategyKind::Entropy) && learner.is_committee())
    throw Error(std::string(strategies::to_string(strategy)) + " needs a single learner, got committee '" +
                learner.name() + "'");
}

inline Metrics evaluate_predictor(const Predictor& p, const RepeatData& data) {
  std::vector<int> truth, pred;
  truth.reserve(data.test.size());
  pred.reserve(data.test.size());
  for (auto i : data.test) {
    truth.push_back(data.labels[i]);
    pred.push_back(p.predict(data.features[i]));
  }
  return learners::compute_metrics(truth, pred);
}

// Trains on the given documents (in ascending index order).
inline Predictor train_on(const LearnerSpec& learner, const RepeatData& data, std::span<const std::size_t> labeled,
                          const ExperimentConfig& cfg) {
  std::vector<SparseVector> xs;
  std::vector<int> ys;
  xs.reserve(labeled.size());
  ys.reserve(labeled.size());
  for (auto i : labeled) {
    if (data.labels[i] < 0) throw Error("unlabeled document " + data.ids[i] + " in the labeled set");
    xs.push_back(data.features[i]);
    ys.push_back(data.labels[i]);
  }
  return Predictor(learner, learners::Examples{xs, ys, data.dim}, cfg, data.repeat);
}

// Seed-train, then query / annotate / retrain until the pool is empty. One
// cell per iteration, iteration 0 being the seed-only model.
inline std::vector<CurveCell> run_active_learning(const RepeatData& data, StrategyKind strategy,
                                                  const LearnerSpec& learner, const ExperimentConfig& cfg) {
  check_arity(strategy, learner);
  if (cfg.batch_size < 1) throw Error("batch_size must be >= 1");
  for (auto i : data.pool)
    if (data.labels[i] < 0) throw Error("unlabeled pool document " + data.ids[i]);

  std::vector<std::size_t> labeled = data.seed;
  std::vector<std::size_t> pool = data.pool;
  std::vector<CurveCell> cells;
  for (std::size_t it = 0;; ++it) {
    const Predictor model = train_on(learner, data, labeled, cfg);
    cells.push_back({std::string(strategies::to_string(strategy)), learner.name(), data.repeat, it, labeled.size(),
                     evaluate_predictor(model, data)});
    if (pool.empty()) break;

    const std::size_t k = std::min(cfg.batch_size, pool.size());
    std::vector<std::string> chosen;
    if (strategy == StrategyKind::Random) {
      std::vector<std::string> ids;
      ids.reserve(pool.size());
      for (auto i : pool) ids.push_back(data.ids[i]);
      chosen = strategies::random_batch(ids, k, query_seed(cfg, data.repeat, it));
    } else {
      std::vector<strategies::ScoredId> scores;
      scores.reserve(pool.size());
      for (auto i : pool) scores.push_back({data.ids[i], model.score(strategy, data.features[i])});
      chosen = strategies::select_batch(scores, k);
    }
    const std::unordered_set<std::string> picked(chosen.begin(), chosen.end());
    std::vector<std::size_t> rest;
    rest.reserve(pool.size() - k);
    for (auto i : pool) (picked.count(data.ids[i]) ? labeled : rest).push_back(i);
    std::sort(labeled.begin(), labeled.end());
    pool.swap(rest);
  }
  return cells;
}

// ---- experiment ----

struct CurvePoint {
  std::size_t iteration = 0;
  std::size_t labels_used = 0;
  std::size_t n = 0;  // repeats contributing
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool ci_degenerate = false;  // fewer than 2 repeats: point estimate only
};

struct StrategySummary {
  std::string strategy;
  std::string learner;
  std::vector<CurvePoint> curve;
  double full_value = 0.0;  // mean metric at pool exhaustion
  std::optional<std::size_t> labels_to_target;
  double auc = 0.0;
  std::vector<std::optional<std::size_t>> repeat_labels_to_target;  // per repeat, own full-pool target
};

struct ExperimentResult {
  std::vector<CurveCell> cells;
  std::vector<StrategySummary> summaries;
  std::size_t excluded_unlabeled = 0;
};

namespace detail {

inline std::optional<std::size_t> first_reaching(const std::vector<std::pair<std::size_t, double>>& curve,
                                                 double target) {
  for (const auto& [labels, value] : curve)
    if (value >= target) return labels;
  return std::nullopt;
}

}  // namespace detail

// Mean curve with Student-t CI, labels-to-target (smallest labels_used whose
// mean reaches target_fraction of the full-pool mean) and trapezoidal area
// under (labels_used, mean). Groups appear in first-seen order.
inline std::vector<StrategySummary> summarize_strategies(std::span<const CurveCell> cells, Metric metric,
                                                         double target_fraction) {
  using Key = std::pair<std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::map<std::size_t, std::map<std::size_t, const CurveCell*>>> groups;  // iter -> repeat -> cell
  for (const auto& c : cells) {
    Key key{c.strategy, c.learner};
    if (!groups.count(key)) order.push_back(key);
    groups[key][c.iteration][c.repeat] = &c;
  }
  std::vector<StrategySummary> out;
  for (const auto& key : order) {
    const auto& iters = groups[key];
    StrategySummary s;
    s.strategy = key.first;
    s.learner = key.second;
    std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> per_repeat;
    for (const auto& [iter, reps] : iters) {
      CurvePoint p;
      p.iteration = iter;
      std::vector<double> values;
      for (const auto& [rep, cell] : reps) {
        values.push_back(metric_value(cell->metrics, metric));
        per_repeat[rep].emplace_back(cell->labels_used, values.back());
        p.labels_used = std::max(p.labels_used, cell->labels_used);
      }
      p.n = values.size();
      if (values.size() >= 2) {
        const auto ci = learners::mean_ci(values);
        p.mean = ci.mean;
        p.ci_low = ci.lower;
        p.ci_high = ci.upper;
      } else {
        p.mean = p.ci_low = p.ci_high = values.front();
        p.ci_degenerate = true;
      }
      s.curve.push_back(p);
    }
    s.full_value = s.curve.back().mean;
    std::vector<std::pair<std::size_t, double>> mean_curve;
    for (const auto& p : s.curve) mean_curve.emplace_back(p.labels_used, p.mean);
    s.labels_to_target = detail::first_reaching(mean_curve, target_fraction * s.full_value);
    for (std::size_t i = 1; i < s.curve.size(); ++i)
      s.auc += 0.5 * (s.curve[i].mean + s.curve[i - 1].mean) *
               static_cast<double>(s.curve[i].labels_used - s.curve[i - 1].labels_used);
    for (const auto& [rep, curve] : per_repeat)
      s.repeat_labels_to_target.push_back(detail::first_reaching(curve, target_fraction * curve.back().second));
    out.push_back(std::move(s));
  }
  return out;
}

struct Cell {
  StrategyKind strategy;
  std::size_t learner;
  std::size_t repeat;
};

// The (strategy, learner) pairs that run. Incompatible pairs are skipped, but
// a strategy or learner left with no compatible partner is an error.
inline std::vector<std::pair<StrategyKind, std::size_t>> plan_pairs(const ExperimentConfig& cfg) {
  if (cfg.strategies.empty()) throw Error("no strategies configured");
  if (cfg.learners.empty()) throw Error("no learners configured");
  std::vector<std::pair<StrategyKind, std::size_t>> pairs;
  std::vector<bool> learner_used(cfg.learners.size(), false);
  for (auto s : cfg.strategies) {
    bool any = false;
    std::string last_error;
    for (std::size_t l = 0; l < cfg.learners.size(); ++l) {
      try {
        check_arity(s, cfg.learners[l]);
      } catch (const Error& e) {
        last_error = e.what();
        continue;
      }
      pairs.emplace_back(s, l);
      learner_used[l] = true;
      any = true;
    }
    if (!any) throw Error("strategy " + std::string(strategies::to_string(s)) + " has no compatible learner: " + last_error);
  }
  for (std::size_t l = 0; l < cfg.learners.size(); ++l)
    if (!learner_used[l]) throw Error("learner " + cfg.learners[l].name() + " has no compatible strategy");
  return pairs;
}

inline void check_config(const ExperimentConfig& cfg) {
  if (cfg.batch_size < 1) throw Error("batch_size must be >= 1");
  if (cfg.repeats < 1) throw Error("repeats must be >= 1");
  if (cfg.seed_size < 1) throw Error("seed_size must be >= 1");
  if (!(cfg.target_fraction > 0.0 && cfg.target_fraction <= 1.0)) throw Error("target_fraction must be in (0, 1]");
  for (const auto& l : cfg.learners)
    if (l.members.empty()) throw Error("empty learner specification");
  plan_pairs(cfg);
}

inline unsigned resolve_threads(const ExperimentConfig& cfg) {
  return cfg.threads > 0 ? cfg.threads : thread_count_from_env();
}

// Runs every (strategy, learner, repeat) cell. Unlabeled (unresolved)
// documents are excluded before splitting.
inline ExperimentResult run_experiment(std::span<const Document> all_docs, const ExperimentConfig& cfg) {
  check_config(cfg);
  ExperimentResult result;
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  for (const auto& d : all_docs) {
    if (!d.label) {
      ++result.excluded_unlabeled;
      continue;
    }
    if (!ids.insert(d.id).second) throw Error("duplicate document id " + d.id);
    docs.push_back(d);
  }
  const auto pairs = plan_pairs(cfg);
  const unsigned threads = resolve_threads(cfg);

  std::vector<RepeatData> repeats(cfg.repeats);
  parallel_for(cfg.repeats, threads, [&](std::size_t r) { repeats[r] = prepare_repeat(docs, cfg, r); });

  std::vector<Cell> jobs;
  for (const auto& [s, l] : pairs)
    for (std::size_t r = 0; r < cfg.repeats; ++r) jobs.push_back({s, l, r});
  std::vector<std::vector<CurveCell>> out(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    try {
      out[j] = run_active_learning(repeats[job.repeat], job.strategy, cfg.learners[job.learner], cfg);
    } catch (const Error& e) {
      throw Error("cell (" + std::string(strategies::to_string(job.strategy)) + ", " + cfg.learners[job.learner].name() +
                  ", repeat " + std::to_string(job.repeat) + "): " + e.what());
    }
  });
  for (auto& series : out)
    for (auto& c : series) result.cells.push_back(std::move(c));
  result.summaries = summarize_strategies(result.cells, cfg.metric, cfg.target_fraction);
  return result;
}

// ---- classifier benchmark ----

struct BenchmarkRow {
  LearnerKind learner;
  std::vector<Metrics> runs;
  std::vector<std::size_t> vocab_sizes;  // per run
  std::vector<std::uint64_t> seeds;      // per run
  Metrics mean;  // componentwise mean over runs
  learners::Interval ci;  // CI of the configured metric
  bool ci_degenerate = false;
};

// Trains each learner on the train split and scores it on the test split,
// once per repeat, redrawing the split per repeat unless fixed_split is set.
inline std::vector<BenchmarkRow> benchmark_learners(std::span<const Document> all_docs, const ExperimentConfig& cfg,
                                                    std::span<const LearnerKind> kinds) {
  if (cfg.repeats < 1) throw Error("repeats must be >= 1");
  std::vector<Document> docs;
  for (const auto& d : all_docs)
    if (d.label) docs.push_back(d);
  const unsigned threads = resolve_threads(cfg);
  std::vector<BenchmarkRow> rows;
  for (auto k : kinds)
    rows.push_back({k, std::vector<Metrics>(cfg.repeats), std::vector<std::size_t>(cfg.repeats),
                    std::vector<std::uint64_t>(cfg.repeats), {}, {}, false});

  parallel_for(cfg.repeats, threads, [&](std::size_t r) {
    const Split split = split_dataset(docs.size(), cfg.train_size, cfg.test_size, split_seed(cfg, r));
    std::vector<Document> train;
    for (auto i : split.train) train.push_back(docs[i]);
    const auto vocab = corpus::build_vocab(train, cfg.vocab);
    std::vector<SparseVector> xs, tx;
    std::vector<int> ys, ty;
    for (const auto& d : train) {
      xs.push_back(corpus::vectorize(d, vocab));
      ys.push_back(*d.label);
    }
    for (auto i : split.test) {
      tx.push_back(corpus::vectorize(docs[i], vocab));
      ty.push_back(*docs[i].label);
    }
    const learners::Examples data{xs, ys, vocab.size()};
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto seed = model_seed(cfg, r, 0, rows[k].learner);
      const auto model = learners::fit(rows[k].learner, data, cfg.hyperparams, seed);
      rows[k].runs[r] = learners::evaluate(model, tx, ty);
      rows[k].vocab_sizes[r] = vocab.size();
      rows[k].seeds[r] = seed;
    }
  });

  // Equal runs average to exactly their common value.
  auto mean_of = [](const std::vector<Metrics>& runs, double Metrics::*field) {
    double sum = 0.0;
    bool equal = true;
    for (const auto& m : runs) {
      sum += m.*field;
      equal = equal && m.*field == runs.front().*field;
    }
    return equal ? runs.front().*field : sum / static_cast<double>(runs.size());
  };
  for (auto& row : rows) {
    row.mean.precision = mean_of(row.runs, &Metrics::precision);
    row.mean.recall = mean_of(row.runs, &Metrics::recall);
    row.mean.f1_pos = mean_of(row.runs, &Metrics::f1_pos);
    row.mean.f1_weighted = mean_of(row.runs, &Metrics::f1_weighted);
    row.mean.accuracy = mean_of(row.runs, &Metrics::accuracy);
    std::vector<double> values;
    for (const auto& m : row.runs) values.push_back(metric_value(m, cfg.metric));
    if (values.size() >= 2) {
      row.ci = learners::mean_ci(values);
    } else {
      row.ci = {values.front(), values.front(), values.front()};
      row.ci_degenerate = true;
    }
  }
  return rows;
}

// ---- files ----

inline constexpr std::string_view kCurveHeader =
    "strategy,learner,repeat,iteration,labels_used,precision,recall,f1_pos,f1_weighted";

inline std::string curve_to_csv(std::span<const CurveCell> cells) {
  std::string out(kCurveHeader);
  out += '\n';
  for (const auto& c : cells) {
    out += c.strategy + ',' + c.learner + ',' + std::to_string(c.repeat) + ',' + std::to_string(c.iteration) + ',' +
           std::to_string(c.labels_used) + ',' + io::fmt_double(c.metrics.precision) + ',' +
           io::fmt_double(c.metrics.recall) + ',' + io::fmt_double(c.metrics.f1_pos) + ',' +
           io::fmt_double(c.metrics.f1_weighted) + '\n';
  }
  return out;
}

inline std::vector<CurveCell> read_curve_csv(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::istringstream in(io::read_file(path));
  std::string line;
  std::size_t row = 0;
  std::vector<CurveCell> cells;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCurveHeader) throw ParseError(source, row, "unexpected header, want: " + std::string(kCurveHeader));
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 9) throw ParseError(source, row, "expected 9 columns, got " + std::to_string(f.size()));
    CurveCell c;
    c.strategy = f[0];
    c.learner = f[1];
    if (c.strategy.empty() || c.learner.empty()) throw ParseError(source, row, "empty strategy or learner");
    auto nonneg = [&](const std::string& s) {
      const auto v = io::parse_int(s, source, row);
      if (v < 0) throw ParseError(source, row, "negative count: " + s);
      return static_cast<std::size_t>(v);
    };
    c.repeat = nonneg(f[2]);
    c.iteration = nonneg(f[3]);
    c.labels_used = nonneg(f[4]);
    c.metrics.precision = io::parse_double(f[5], source, row);
    c.metrics.recall = io::parse_double(f[6], source, row);
    c.metrics.f1_pos = io::parse_double(f[7], source, row);
    c.metrics.f1_weighted = io::parse_double(f[8], source, row);
    cells.push_back(std::move(c));
  }
  return cells;
}

inline io::Json summaries_to_json(std::span<const StrategySummary> summaries, Metric metric, double target_fraction) {
  io::Json arr = io::Json::array();
  for (const auto& s : summaries) {
    io::Json curve = io::Json::array();
    for (const auto& p : s.curve)
      curve.push_back({{"iteration", p.iteration},
                       {"labels_used", p.labels_used},
                       {"n_repeats", p.n},
                       {"mean", p.mean},
                       {"ci_low", p.ci_low},
                       {"ci_high", p.ci_high},
                       {"ci_degenerate", p.ci_degenerate}});
    io::Json per_repeat = io::Json::array();
    for (const auto& v : s.repeat_labels_to_target) per_repeat.push_back(v ? io::Json(*v) : io::Json("not reached"));
    arr.push_back({{"strategy", s.strategy},
                   {"learner", s.learner},
                   {"metric", to_string(metric)},
                   {"target_fraction", target_fraction},
                   {"full_pool_mean", s.full_value},
                   {"labels_to_target", s.labels_to_target ? io::Json(*s.labels_to_target) : io::Json("not reached")},
                   {"repeat_labels_to_target", per_repeat},
                   {"auc", s.auc},
                   {"mean_curve", curve}});
  }
  return arr;
}

// Plot-ready long format: one row per (strategy, learner, iteration).
inline std::string summaries_to_plot_csv(std::span<const StrategySummary> summaries) {
  std::string out = "strategy,learner,iteration,labels_used,n_repeats,mean,ci_low,ci_high\n";
  for (const auto& s : summaries)
    for (const auto& p : s.curve)
      out += s.strategy + ',' + s.learner + ',' + std::to_string(p.iteration) + ',' + std::to_string(p.labels_used) +
             ',' + std::to_string(p.n) + ',' + io::fmt_double(p.mean) + ',' + io::fmt_double(p.ci_low) + ',' +
             io::fmt_double(p.ci_high) + '\n';
  return out;
}

// ---- config ----

inline ExperimentConfig config_from_json(const io::Json& j) {
  static const std::set<std::string> known{
      "dataset_path", "train_size", "test_size", "seed_size", "batch_size", "strategies", "learners",
      "repeats", "master_seed", "metric", "fixed_split", "ngram_min", "ngram_max", "min_df",
      "target_fraction", "threads", "hyperparams"};
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error("unknown config field \"" + key + "\"");
  ExperimentConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("dataset_path", c.dataset_path);
  get("train_size", c.train_size);
  get("test_size", c.test_size);
  get("seed_size", c.seed_size);
  get("batch_size", c.batch_size);
  get("repeats", c.repeats);
  get("master_seed", c.master_seed);
  get("fixed_split", c.fixed_split);
  get("ngram_min", c.vocab.ngram_min);
  get("ngram_max", c.vocab.ngram_max);
  get("min_df", c.vocab.min_df);
  get("target_fraction", c.target_fraction);
  get("threads", c.threads);
  if (j.contains("metric")) c.metric = parse_metric(j.at("metric").get<std::string>());
  if (j.contains("strategies")) {
    c.strategies.clear();
    for (const auto& s : j.at("strategies")) c.strategies.push_back(strategies::parse_strategy(s.get<std::string>()));
  }
  if (j.contains("learners")) {
    c.learners.clear();
    for (const auto& s : j.at("learners")) c.learners.push_back(LearnerSpec::parse(s.get<std::string>()));
  }
  if (j.contains("hyperparams")) {
    const auto& h = j.at("hyperparams");
    auto& hp = c.hyperparams;
    auto sub = [&](const char* name, auto&& fn) {
      if (h.contains(name)) fn(h.at(name));
    };
    auto opt = [](const io::Json& o, const char* key, auto& field) {
      if (o.contains(key)) field = o.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    sub("lr", [&](const io::Json& o) {
      opt(o, "max_iter", hp.lr.max_iter);
      opt(o, "learning_rate", hp.lr.learning_rate);
      opt(o, "l2", hp.lr.l2);
    });
    sub("nb", [&](const io::Json& o) { opt(o, "alpha", hp.nb.alpha); });
    sub("rf", [&](const io::Json& o) {
      opt(o, "n_trees", hp.rf.n_trees);
      opt(o, "max_depth", hp.rf.max_depth);
      opt(o, "min_samples_leaf", hp.rf.min_samples_leaf);
      opt(o, "max_features", hp.rf.max_features);
      opt(o, "bootstrap", hp.rf.bootstrap);
    });
    sub("svm", [&](const io::Json& o) {
      opt(o, "c", hp.svm.c);
      opt(o, "max_iter", hp.svm.max_iter);
      opt(o, "step0", hp.svm.step0);
      opt(o, "prob_scale", hp.svm.prob_scale);
    });
  }
  return c;
}

inline io::Json config_to_json(const ExperimentConfig& c) {
  io::Json strategies = io::Json::array(), learners_arr = io::Json::array();
  for (auto s : c.strategies) strategies.push_back(strategies::to_string(s));
  for (const auto& l : c.learners) learners_arr.push_back(l.name());
  return {{"dataset_path", c.dataset_path},
          {"train_size", c.train_size},
          {"test_size", c.test_size},
          {"seed_size", c.seed_size},
          {"batch_size", c.batch_size},
          {"strategies", strategies},
          {"learners", learners_arr},
          {"repeats", c.repeats},
          {"master_seed", c.master_seed},
          {"metric", to_string(c.metric)},
          {"fixed_split", c.fixed_split},
          {"ngram_min", c.vocab.ngram_min},
          {"ngram_max", c.vocab.ngram_max},
          {"min_df", c.vocab.min_df},
          {"target_fraction", c.target_fraction},
          {"hyperparams",
           {{"lr", learners::hyperparams_to_json(LearnerKind::LR, c.hyperparams)},
            {"nb", learners::hyperparams_to_json(LearnerKind::NB, c.hyperparams)},
            {"rf", learners::hyperparams_to_json(LearnerKind::RF, c.hyperparams)},
            {"svm", learners::hyperparams_to_json(LearnerKind::SVM, c.hyperparams)}}}};
}

}  // namespace alcrowd::simulator
