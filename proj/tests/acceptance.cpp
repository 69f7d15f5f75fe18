// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "alcrowd/alcrowd.hpp"
#include "alcrowd/cli.hpp"

using namespace alcrowd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail.clear();
  if (o.detail.find(why) != std::string::npos) return;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += why;
  o.pass = false;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---- independent oracles ----

double entropy_oracle(const std::vector<double>& p) {
  double bits = 0;
  for (double v : p)
    if (v > 0) bits -= v * std::log2(v);
  return bits * std::log(2.0);
}

double kl_oracle(const std::vector<std::vector<double>>& members) {
  const std::size_t k = members[0].size();
  std::vector<double> avg(k, 0.0);
  for (const auto& m : members)
    for (std::size_t i = 0; i < k; ++i) avg[i] += m[i] / static_cast<double>(members.size());
  double total = 0;
  for (const auto& m : members)
    for (std::size_t i = 0; i < k; ++i)
      if (m[i] > 0) total += m[i] * std::log(m[i] / avg[i]);
  return total / static_cast<double>(members.size());
}

double cohen_oracle(const std::vector<int>& a, const std::vector<int>& b, int k) {
  std::vector<std::vector<double>> table(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) table[a[i]][b[i]] += 1.0;
  const double n = static_cast<double>(a.size());
  double po = 0.0, pe = 0.0;
  for (int i = 0; i < k; ++i) {
    po += table[i][i] / n;
    double row = 0.0, col = 0.0;
    for (int j = 0; j < k; ++j) {
      row += table[i][j];
      col += table[j][i];
    }
    pe += (row / n) * (col / n);
  }
  return (po - pe) / (1.0 - pe);
}

// Observed agreement as the fraction of agreeing ordered rater pairs.
double fleiss_oracle(const std::vector<std::vector<int>>& labels, int k) {
  double agree = 0.0, pairs = 0.0, total = 0.0;
  std::vector<double> freq(k, 0.0);
  for (const auto& row : labels)
    for (std::size_t i = 0; i < row.size(); ++i) {
      freq[row[i]] += 1.0;
      total += 1.0;
      for (std::size_t j = 0; j < row.size(); ++j)
        if (i != j) {
          pairs += 1.0;
          agree += row[i] == row[j] ? 1.0 : 0.0;
        }
    }
  double pe = 0.0;
  for (double f : freq) pe += (f / total) * (f / total);
  return (agree / pairs - pe) / (1.0 - pe);
}

std::vector<double> random_dist(Rng& rng, std::size_t k) {
  std::vector<double> p(k);
  double s = 0;
  for (auto& v : p) s += (v = bernoulli(rng, 0.2) ? 0.0 : uniform01(rng));
  if (s == 0) {
    p[0] = 1;
    s = 1;
  }
  for (auto& v : p) v /= s;
  return p;
}

// ---- criteria ----

Outcome strategy_scores() {
  using namespace strategies;
  Outcome o;
  auto near = [&](double got, double want, const std::string& what) {
    if (!(std::abs(got - want) <= 1e-6)) fail(o, what + " = " + std::to_string(got));
  };
  near(least_confident_score({{0.5, 0.5}}), 0.5, "LC[0.5,0.5]");
  near(least_confident_score({{1, 0}}), 0.0, "LC[1,0]");
  near(least_confident_score({{0.7, 0.3}}), 0.3, "LC[0.7,0.3]");
  near(entropy_score({{0.5, 0.5}}), 0.693147, "H[0.5,0.5]");
  near(entropy_score({{1, 0}}), 0.0, "H[1,0]");
  near(entropy_score({{0.9, 0.1}}), 0.325083, "H[0.9,0.1]");
  near(vote_entropy_score(std::vector<int>{1, 1, 1}, 2), 0.0, "VE unanimous");
  near(vote_entropy_score(std::vector<int>{1, 1, 0}, 2), 0.636514, "VE(1,1,0)");
  near(vote_entropy_score(std::vector<int>{1, 1, 0, 0}, 2), std::log(2.0), "VE(1,1,0,0)");
  near(kl_qbc_score(std::vector<ProbDist>{{{0.3, 0.7}}, {{0.3, 0.7}}}), 0.0, "KL identical");
  near(kl_qbc_score(std::vector<ProbDist>{{{1, 0}}, {{0, 1}}}), 0.693147, "KL opposite");
  near(kl_qbc_score(std::vector<ProbDist>{{{0.5, 0.5}}, {{0.5, 0.5}}, {{0.5, 0.5}}}), 0.0, "KL three uniform");
  if (select_batch(std::vector<ScoredId>{{"a", 0.1}, {"b", 0.9}, {"c", 0.5}}, 1) != std::vector<std::string>{"b"})
    fail(o, "select_batch max");
  if (select_batch(std::vector<ScoredId>{{"a", 0.5}, {"b", 0.5}}, 1) != std::vector<std::string>{"a"})
    fail(o, "select_batch tie");

  Rng rng(20241018);
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t k = 2 + uniform_index(rng, 3);
    const auto p = random_dist(rng, k);
    const ProbDist pd{p}, uniform{std::vector<double>(k, 1.0 / static_cast<double>(k))};
    const double h = entropy_score(pd), lc = least_confident_score(pd);
    if (std::abs(h - entropy_oracle(p)) > 1e-6) fail(o, "entropy oracle mismatch");
    if (std::abs(lc - (1.0 - *std::max_element(p.begin(), p.end()))) > 1e-6) fail(o, "LC oracle mismatch");
    if (h < 0 || h > std::log(static_cast<double>(k)) + 1e-12) fail(o, "entropy out of [0, ln K]");
    if (h > entropy_score(uniform) + 1e-12 || lc > least_confident_score(uniform) + 1e-12)
      fail(o, "uniform not maximal");
    std::vector<double> onehot(k, 0.0);
    onehot[uniform_index(rng, k)] = 1.0;
    if (entropy_score({onehot}) != 0.0 || least_confident_score({onehot}) != 0.0) fail(o, "one-hot not zero");

    std::vector<ProbDist> members;
    std::vector<std::vector<double>> raw;
    for (std::size_t c = 0; c < 2 + uniform_index(rng, 3); ++c) {
      raw.push_back(random_dist(rng, k));
      members.push_back({raw.back()});
    }
    const double kl = kl_qbc_score(members);
    if (kl < 0 || std::abs(kl - kl_oracle(raw)) > 1e-6) fail(o, "KL oracle mismatch");
    if (kl_qbc_score(std::vector<ProbDist>(3, members[0])) > 1e-12) fail(o, "KL of identical members not zero");

    std::vector<int> votes(2 + uniform_index(rng, 5));
    for (auto& v : votes) v = static_cast<int>(uniform_index(rng, 2));
    double ones = 0;
    for (int v : votes) ones += v;
    const double q = ones / static_cast<double>(votes.size());
    if (std::abs(vote_entropy_score(votes, 2) - entropy_oracle({q, 1 - q})) > 1e-6) fail(o, "vote entropy oracle");

    // Batch selection depends only on the ranking of scores.
    std::vector<ScoredId> s1, s2;
    for (std::size_t i = 0; i < 12; ++i) {
      const double v = static_cast<double>(uniform_index(rng, 6));
      const std::string id = "d" + std::to_string(i);
      s1.push_back({id, v});
      s2.push_back({id, std::exp(v) - 3.0});
    }
    const std::size_t take = 1 + uniform_index(rng, 12);
    if (select_batch(s1, take) != select_batch(s2, take)) fail(o, "select_batch not rank-invariant");
  }
  if (o.pass) o.detail = "hand values within 1e-6; " + std::to_string(trials) + " random distributions checked";
  return o;
}

Outcome kappa_oracle() {
  Outcome o;
  Rng rng(7);
  double worst = 0;
  const int instances = 100;
  for (int t = 0; t < instances; ++t) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 2));
    const std::size_t raters = 3 + uniform_index(rng, 3);
    std::vector<std::vector<int>> labels(20, std::vector<int>(raters));
    for (auto& row : labels)
      for (auto& v : row) v = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(k)));
    const double f = qc::fleiss_kappa(qc::RatingMatrix::from_labels(labels, static_cast<std::size_t>(k)));
    worst = std::max(worst, std::abs(f - fleiss_oracle(labels, k)));
    std::vector<int> a, b;
    for (const auto& row : labels) {
      a.push_back(row[0]);
      b.push_back(row[1]);
    }
    worst = std::max(worst, std::abs(qc::cohen_kappa(a, b) - cohen_oracle(a, b, k)));
  }
  if (!(worst <= 1e-9)) fail(o, "max deviation " + fmt("%.3g", worst));
  else o.detail = std::to_string(instances) + " instances, max deviation " + fmt("%.2g", worst);
  return o;
}

qc::AssignmentSpec make_assignment(const std::string& id, int first_item) {
  qc::AssignmentSpec a;
  a.assignment_id = id;
  for (int i = 0; i < 12; ++i) a.item_ids.push_back("t" + std::to_string(first_item + i));
  a.control_items = {{a.item_ids[0], 1}, {a.item_ids[1], 0}};
  return a;
}

qc::WorkerResponse answer_all(const qc::AssignmentSpec& a, const std::string& worker, double duration) {
  qc::WorkerResponse r;
  r.assignment_id = a.assignment_id;
  r.worker_id = worker;
  r.duration_s = duration;
  for (const auto& item : a.item_ids) r.answers[item] = 0;
  for (const auto& [item, expected] : a.control_items) r.answers[item] = expected;
  return r;
}

Outcome qc_rules() {
  using qc::Verdict;
  Outcome o;
  const auto a = make_assignment("A0", 0);
  if (qc::validate_response(answer_all(a, "w", 60), a) != Verdict::Ok) fail(o, "60 s with controls not OK");
  if (qc::validate_response(answer_all(a, "w", 46), a) != Verdict::TooFast) fail(o, "46 s not TOO_FAST");
  if (qc::validate_response(answer_all(a, "w", 46.999), a) != Verdict::TooFast) fail(o, "46.999 s not TOO_FAST");
  if (qc::validate_response(answer_all(a, "w", 47), a) != Verdict::Ok) fail(o, "47 s not OK");
  for (const auto& [item, expected] : a.control_items) {
    auto miss = answer_all(a, "w", 120);
    miss.answers[item] = 1 - expected;
    if (qc::validate_response(miss, a) != Verdict::ControlFailed) fail(o, "single control miss not CONTROL_FAILED");
  }

  // Careful workers take 95-195 s and answer 90% correctly; fast ones take
  // 47-87 s and answer at random.
  Rng rng(9);
  std::map<std::string, qc::AssignmentSpec> assignments;
  std::map<std::string, int> gold;
  std::vector<qc::WorkerResponse> responses;
  for (int g = 0; g < 40; ++g) {
    const auto asg = make_assignment("A" + std::to_string(g), g * 12);
    assignments[asg.assignment_id] = asg;
    for (int i = 2; i < 12; ++i) gold[asg.item_ids[i]] = static_cast<int>(uniform_index(rng, 2));
    for (int w = 0; w < 5; ++w) {
      const bool fast = w < 2;
      auto r = answer_all(asg, "w" + std::to_string(g) + "_" + std::to_string(w),
                          fast ? 47 + uniform01(rng) * 40 : 95 + uniform01(rng) * 100);
      for (int i = 2; i < 12; ++i) {
        const int truth = gold[asg.item_ids[i]];
        r.answers[asg.item_ids[i]] =
            fast ? static_cast<int>(uniform_index(rng, 2)) : (bernoulli(rng, 0.9) ? truth : 1 - truth);
      }
      responses.push_back(r);
    }
  }
  const auto rows =
      qc::cutoff_sweep(responses, assignments, gold, std::vector<double>{0, 90}, qc::CutoffDirection::Lower);
  if (!rows[0].mean_kappa || !rows[1].mean_kappa) {
    fail(o, "sweep kappa missing");
    return o;
  }
  const double k0 = *rows[0].mean_kappa, k90 = *rows[1].mean_kappa;
  if (!(k90 > k0)) fail(o, "kappa at 90 s " + fmt("%.3f", k90) + " not above kappa at 0 s " + fmt("%.3f", k0));
  if (o.pass)
    o.detail = "47 s floor and control rule hold; LOWER kappa at 0 s " + fmt("%.3f", k0) + " < at 90 s " +
               fmt("%.3f", k90);
  return o;
}

Outcome classifier_sanity() {
  using namespace learners;
  Outcome o;
  simulator::SynthSpec spec;
  spec.n_docs = 5000;
  spec.signal = 0.9;
  spec.noise = 0.02;
  spec.seed = 4;
  const auto docs = simulator::generate_synthetic_corpus(spec);
  const std::vector<corpus::Document> train(docs.begin(), docs.begin() + 4000), test(docs.begin() + 4000, docs.end());
  const auto vocab = corpus::build_vocab(train);
  std::vector<SparseVector> xtr, xte;
  std::vector<int> ytr, yte;
  for (const auto& d : train) {
    xtr.push_back(corpus::vectorize(d, vocab));
    ytr.push_back(*d.label);
  }
  for (const auto& d : test) {
    xte.push_back(corpus::vectorize(d, vocab));
    yte.push_back(*d.label);
  }
  std::string scores;
  for (auto kind : {LearnerKind::LR, LearnerKind::NB, LearnerKind::RF, LearnerKind::SVM}) {
    const auto model = fit(kind, Examples{xtr, ytr, vocab.size()}, {}, 11);
    const double f1 = evaluate(model, xte, yte).f1_pos;
    scores += std::string(scores.empty() ? "" : " ") + std::string(to_string(kind)) + "=" + fmt("%.3f", f1);
    if (!(f1 >= 0.95)) fail(o, std::string(to_string(kind)) + " f1_pos " + fmt("%.4f", f1));
  }

  // Gradient against central finite differences.
  Rng rng(13);
  double worst_grad = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 6;
    std::vector<SparseVector> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < 25; ++i) {
      SparseVector v;
      for (std::uint32_t j = 0; j < dim; ++j)
        if (bernoulli(rng, 0.4)) v.entries.push_back({j, static_cast<double>(1 + uniform_index(rng, 3))});
      x.push_back(v);
      y.push_back(static_cast<int>(i % 2));
    }
    const Examples ex{x, y, dim};
    std::vector<double> w(dim);
    for (auto& v : w) v = uniform01(rng) * 2 - 1;
    const double b = uniform01(rng) - 0.5, l2 = 0.01, h = 1e-6;
    std::vector<double> grad;
    double gb = 0;
    logistic_objective(w, b, ex, l2, &grad, &gb);
    for (std::size_t j = 0; j <= dim; ++j) {
      std::vector<double> wp = w, wm = w;
      double bp = b, bm = b;
      if (j < dim) wp[j] += h, wm[j] -= h;
      else bp += h, bm -= h;
      const double fd = (logistic_objective(wp, bp, ex, l2) - logistic_objective(wm, bm, ex, l2)) / (2 * h);
      const double g = j < dim ? grad[j] : gb;
      worst_grad = std::max(worst_grad, std::abs(fd - g) / std::max(1.0, std::abs(g)));
    }
  }
  if (!(worst_grad <= 1e-5)) fail(o, "gradient deviation " + fmt("%.3g", worst_grad));

  // Posterior against direct products of smoothed token probabilities.
  double worst_nb = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + uniform_index(rng, 5);
    std::vector<SparseVector> x;
    std::vector<int> y;
    const std::size_t n = 6 + uniform_index(rng, 10);
    for (std::size_t i = 0; i < n; ++i) {
      SparseVector v;
      for (std::uint32_t j = 0; j < dim; ++j)
        if (bernoulli(rng, 0.5)) v.entries.push_back({j, static_cast<double>(1 + uniform_index(rng, 3))});
      x.push_back(v);
      y.push_back(i < 2 ? static_cast<int>(i) : static_cast<int>(uniform_index(rng, 2)));
    }
    const auto model = fit(LearnerKind::NB, Examples{x, y, dim}, {}, 0);
    std::vector<std::vector<double>> counts(2, std::vector<double>(dim, 0.0));
    std::vector<double> ndocs(2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ndocs[y[i]] += 1;
      for (const auto& e : x[i].entries) counts[y[i]][e.index] += e.weight;
    }
    SparseVector probe;
    for (std::uint32_t j = 0; j < dim; ++j)
      if (bernoulli(rng, 0.5)) probe.entries.push_back({j, static_cast<double>(1 + uniform_index(rng, 3))});
    double joint[2];
    for (int c = 0; c < 2; ++c) {
      double total = 0;
      for (double v : counts[c]) total += v;
      joint[c] = ndocs[c] / static_cast<double>(n);
      for (const auto& e : probe.entries)
        for (int rep = 0; rep < static_cast<int>(e.weight); ++rep)
          joint[c] *= (counts[c][e.index] + 1.0) / (total + static_cast<double>(dim));
    }
    worst_nb = std::max(worst_nb, std::abs(model.predict_proba(probe)[1] - joint[1] / (joint[0] + joint[1])));
  }
  if (!(worst_nb <= 1e-12)) fail(o, "NB posterior deviation " + fmt("%.3g", worst_nb));
  if (o.pass)
    o.detail = "f1_pos " + scores + "; gradient dev " + fmt("%.1g", worst_grad) + "; NB dev " + fmt("%.1g", worst_nb);
  return o;
}

// Corpus and configuration shared by the active-learning criteria: a 1,000
// token class vocabulary with two class tokens per document means most
// documents carry tokens the seed set never saw.
std::vector<corpus::Document> al_corpus() {
  simulator::SynthSpec spec;
  spec.n_docs = 5300;
  spec.class_vocab = 1000;
  spec.class_tokens = 2;
  spec.signal = 1.0;
  spec.background_vocab = 1000;
  spec.background_tokens = 6;
  spec.noise = 0.02;
  spec.seed = 2024;
  return simulator::generate_synthetic_corpus(spec);
}

simulator::ExperimentConfig al_config() {
  simulator::ExperimentConfig cfg;
  cfg.train_size = 300;  // the whole train split seeds the learner; the 4,000 remaining documents form the pool
  cfg.test_size = 1000;
  cfg.seed_size = 300;
  cfg.batch_size = 300;
  cfg.repeats = 10;
  cfg.master_seed = 7;
  cfg.hyperparams.lr.max_iter = 3000;
  cfg.hyperparams.lr.learning_rate = 0.5;
  return cfg;
}

const simulator::StrategySummary* find_summary(const simulator::ExperimentResult& r, const std::string& strategy,
                                               const std::string& learner) {
  for (const auto& s : r.summaries)
    if (s.strategy == strategy && s.learner == learner) return &s;
  return nullptr;
}

// Repeats where `a` reaches its target with no more labels than `b`.
int repeats_at_most(const simulator::StrategySummary& a, const simulator::StrategySummary& b) {
  int wins = 0;
  for (std::size_t r = 0; r < a.repeat_labels_to_target.size(); ++r) {
    const auto& x = a.repeat_labels_to_target[r];
    const auto& y = b.repeat_labels_to_target[r];
    if (x && (!y || *x <= *y)) ++wins;
  }
  return wins;
}

std::string ltt(const simulator::StrategySummary& s) {
  return s.labels_to_target ? std::to_string(*s.labels_to_target) : std::string("not reached");
}

Outcome al_benefit() {
  using strategies::StrategyKind;
  Outcome o;
  const auto docs = al_corpus();
  auto cfg = al_config();
  cfg.strategies = {StrategyKind::Random, StrategyKind::LeastConfident, StrategyKind::Entropy};
  cfg.learners = {simulator::LearnerSpec::parse("lr"), simulator::LearnerSpec::parse("rf")};
  const auto result = simulator::run_experiment(docs, cfg);
  std::string detail;
  for (const std::string learner : {"lr", "rf"}) {
    const auto* rnd = find_summary(result, "random", learner);
    const auto* ent = find_summary(result, "entropy", learner);
    const auto* lc = find_summary(result, "least_confident", learner);
    const int wins = repeats_at_most(*ent, *rnd);
    if (wins < 8) fail(o, "entropy+" + learner + " at most random in " + std::to_string(wins) + "/10 repeats");
    detail += (detail.empty() ? "" : "; ") + learner + ": entropy<=random in " + std::to_string(wins) +
              "/10 (mean-curve labels " + ltt(*ent) + " vs " + ltt(*rnd) + "), least_confident<=random in " +
              std::to_string(repeats_at_most(*lc, *rnd)) + "/10 (reported only)";
  }
  if (o.pass) o.detail = detail;
  else o.detail += " | " + detail;
  return o;
}

Outcome qbc_run() {
  using strategies::StrategyKind;
  Outcome o;
  const auto docs = al_corpus();
  auto cfg = al_config();
  cfg.strategies = {StrategyKind::VoteEntropy, StrategyKind::KlDivergence};
  const auto committee = simulator::LearnerSpec::parse("lr+rf+svm");
  cfg.learners = {committee};
  const auto result = simulator::run_experiment(docs, cfg);
  double worst = 0;
  std::size_t checked = 0;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const auto data = simulator::prepare_repeat(docs, cfg, r);
    std::vector<std::size_t> all = data.seed;
    all.insert(all.end(), data.pool.begin(), data.pool.end());
    std::sort(all.begin(), all.end());
    const double f1 =
        simulator::evaluate_predictor(simulator::train_on(committee, data, all, cfg), data).f1_pos;
    for (const std::string strategy : {"vote_entropy", "kl_divergence"}) {
      const simulator::CurveCell* last = nullptr;
      for (const auto& c : result.cells)
        if (c.strategy == strategy && c.repeat == r && (!last || c.iteration > last->iteration)) last = &c;
      if (!last || last->labels_used != all.size()) {
        fail(o, strategy + " repeat " + std::to_string(r) + " did not exhaust the pool");
        continue;
      }
      worst = std::max(worst, std::abs(last->metrics.f1_pos - f1));
      ++checked;
    }
  }
  if (!(worst <= 1e-9)) fail(o, "final F1 deviates from one-shot committee by " + fmt("%.3g", worst));
  if (o.pass) {
    o.detail = std::to_string(checked) + " final iterations match the one-shot committee (max dev " +
               fmt("%.1g", worst) + ")";
    for (const auto& s : result.summaries)
      o.detail += "; " + s.strategy + " full F1 " + fmt("%.3f", s.full_value) + ", labels to target " + ltt(s);
  }
  return o;
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

Outcome determinism() {
  Outcome o;
  simulator::SynthSpec spec;
  spec.n_docs = 700;
  spec.noise = 0.05;
  spec.seed = 3;
  const auto docs = simulator::generate_synthetic_corpus(spec);
  const fs::path dir = fs::temp_directory_path() / ("alcrowd_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path dataset = dir / "corpus.jsonl";
  io::write_atomic(dataset, corpus::dataset_to_jsonl(docs));

  std::vector<std::string> outputs;
  for (int run = 0; run < 2; ++run) {
    cli::ExperimentFlags f;
    f.dataset = dataset.string();
    f.out_dir = (dir / ("run" + std::to_string(run))).string();
    f.seed = 42;
    f.repeats = 3;
    f.train_size = 200;
    f.test_size = 200;
    f.seed_size = 100;
    f.batch_size = 75;
    f.strategies = {"random", "entropy", "vote_entropy"};
    f.learners = {"lr", "nb+svm"};
    std::ostringstream out, err;
    if (cli::cmd_simulate(f, out, err) != 0) fail(o, "simulate failed: " + err.str());
    outputs.push_back(slurp(fs::path(f.out_dir) / "curve.csv"));
  }
  if (outputs[0] != outputs[1]) fail(o, "curve.csv differs between identical runs");
  if (outputs[0].empty()) fail(o, "empty curve.csv");

  simulator::ExperimentConfig cfg;
  cfg.train_size = 200;
  cfg.test_size = 200;
  cfg.seed_size = 100;
  cfg.batch_size = 75;
  cfg.repeats = 4;
  cfg.master_seed = 42;
  cfg.strategies = {strategies::StrategyKind::Random, strategies::StrategyKind::LeastConfident,
                    strategies::StrategyKind::KlDivergence};
  cfg.learners = {simulator::LearnerSpec::parse("rf"), simulator::LearnerSpec::parse("lr+rf")};
  cfg.threads = 1;
  const auto one = simulator::curve_to_csv(simulator::run_experiment(docs, cfg).cells);
  cfg.threads = 4;
  const auto many = simulator::curve_to_csv(simulator::run_experiment(docs, cfg).cells);
  if (one != many) fail(o, "1-thread and 4-thread curves differ");
  fs::remove_all(dir);
  if (o.pass) o.detail = "repeat CLI runs byte-identical; 1 vs 4 threads identical";
  return o;
}

Outcome ci_oracle() {
  Outcome o;
  const std::vector<double> v{1, 2, 3};
  const auto ci = learners::mean_ci(v);
  if (std::abs(ci.mean - 2.0) > 1e-3 || std::abs(ci.lower + 0.484) > 1e-3 || std::abs(ci.upper - 4.484) > 1e-3)
    fail(o, "got (" + fmt("%.4f", ci.mean) + ", " + fmt("%.4f", ci.lower) + ", " + fmt("%.4f", ci.upper) + ")");
  else
    o.detail = "(" + fmt("%.3f", ci.mean) + ", " + fmt("%.3f", ci.lower) + ", " + fmt("%.3f", ci.upper) + ")";
  return o;
}

struct Criterion {
  int number;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "strategy-score oracles", 5, strategy_scores},
      {2, "agreement-statistics oracle", 5, kappa_oracle},
      {3, "QC rule fidelity", 30, qc_rules},
      {4, "classifier sanity", 120, classifier_sanity},
      {5, "active-learning benefit", 900, al_benefit},
      {6, "query-by-committee run", 1200, qbc_run},
      {7, "determinism", 0, determinism},
      {8, "confidence interval", 0, ci_oracle},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      fail(o, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) fail(o, "runtime " + fmt("%.1f", secs) + " s over " + fmt("%.0f", c.budget_s) + " s");
    if (!o.pass) ++failures;
    std::printf("%s  %d. %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.number, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
