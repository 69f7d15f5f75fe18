#pragma once

// Crowdsourced-annotation quality control: response validation, consensus
// labels, Cohen's and Fleiss' kappa, cut-off time sweeps and worker-count
// reliability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alcrowd/error.hpp"
#include "alcrowd/io.hpp"
#include "alcrowd/rng.hpp"

namespace alcrowd::qc {

inline constexpr std::size_t kItemsPerAssignment = 12;
inline constexpr std::size_t kControlsPerAssignment = 2;

struct AssignmentSpec {
  std::string assignment_id;
  std::vector<std::string> item_ids;
  std::map<std::string, int> control_items;  // item id -> expected answer

  bool is_control(const std::string& item) const { return control_items.count(item) > 0; }
};

struct WorkerResponse {
  std::string assignment_id;
  std::string worker_id;
  double duration_s = 0.0;
  std::map<std::string, int> answers;
};

struct ValidationPolicy {
  double min_duration_s = 47.0;
  bool require_controls = true;
};

enum class Verdict { Ok, TooFast, ControlFailed, Both };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Ok: return "OK";
    case Verdict::TooFast: return "TOO_FAST";
    case Verdict::ControlFailed: return "CONTROL_FAILED";
    case Verdict::Both: return "BOTH";
  }
  return "?";
}

// Throws if the assignment does not have 12 distinct items with exactly two
// controls drawn from those items.
inline void check_assignment(const AssignmentSpec& spec) {
  const std::string& id = spec.assignment_id;
  if (spec.item_ids.size() != kItemsPerAssignment)
    throw Error("assignment " + id + ": expected 12 items, got " +
                std::to_string(spec.item_ids.size()));
  std::set<std::string> items(spec.item_ids.begin(), spec.item_ids.end());
  if (items.size() != spec.item_ids.size())
    throw Error("assignment " + id + ": duplicate item ids");
  if (spec.control_items.size() != kControlsPerAssignment)
    throw Error("assignment " + id + ": expected 2 control items, got " +
                std::to_string(spec.control_items.size()));
  for (const auto& [item, answer] : spec.control_items) {
    if (!items.count(item)) throw Error("assignment " + id + ": control " + item + " is not an item");
    if (answer != 0 && answer != 1)
      throw Error("assignment " + id + ": control answers must be 0 or 1");
  }
}

// Throws if the response does not answer exactly the assignment's items.
inline void check_response(const WorkerResponse& resp, const AssignmentSpec& spec) {
  if (resp.assignment_id != spec.assignment_id)
    throw Error("response by " + resp.worker_id + " references assignment " + resp.assignment_id +
                ", not " + spec.assignment_id);
  const std::string who = "response by " + resp.worker_id + " to " + spec.assignment_id;
  if (resp.duration_s < 0 || !std::isfinite(resp.duration_s))
    throw Error(who + ": duration must be a non-negative number");
  for (const auto& item : spec.item_ids)
    if (!resp.answers.count(item)) throw Error(who + ": missing answer for item " + item);
  if (resp.answers.size() != spec.item_ids.size())
    throw Error(who + ": answers items outside the assignment");
  for (const auto& [item, a] : resp.answers)
    if (a != 0 && a != 1) throw Error(who + ": answer for " + item + " must be 0 or 1");
}

inline Verdict validate_response(const WorkerResponse& resp, const AssignmentSpec& spec,
                                 const ValidationPolicy& policy = {}) {
  check_response(resp, spec);
  const bool too_fast = resp.duration_s < policy.min_duration_s;
  bool control_failed = false;
  if (policy.require_controls) {
    for (const auto& [item, expected] : spec.control_items)
      if (resp.answers.at(item) != expected) control_failed = true;
  }
  if (too_fast && control_failed) return Verdict::Both;
  if (too_fast) return Verdict::TooFast;
  if (control_failed) return Verdict::ControlFailed;
  return Verdict::Ok;
}

// Strict-majority label; nullopt on an exact tie.
inline std::optional<int> consensus_label(std::span<const int> answers) {
  if (answers.empty()) throw Error("consensus over an empty answer list");
  std::size_t ones = 0;
  for (int a : answers) {
    if (a != 0 && a != 1) throw Error("answers must be 0 or 1");
    ones += (a == 1);
  }
  const std::size_t zeros = answers.size() - ones;
  if (ones > zeros) return 1;
  if (zeros > ones) return 0;
  return std::nullopt;
}

// Chance-corrected agreement between two raters over the same items.
inline double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error("cohen_kappa: sequences differ in length");
  if (a.empty()) throw Error("cohen_kappa: empty input");
  std::map<int, std::size_t> ca, cb;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    agree += (a[i] == b[i]);
  }
  const double n = static_cast<double>(a.size());
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [cat, count] : ca) {
    auto it = cb.find(cat);
    if (it != cb.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) {
    // Both raters used one identical category throughout.
    if (po >= 1.0) return 1.0;
    throw Error("cohen_kappa: undefined (chance agreement is 1)");
  }
  return (po - pe) / (1.0 - pe);
}

// Per-item category counts with a constant number of raters per item.
struct RatingMatrix {
  std::vector<std::vector<int>> counts;

  std::size_t items() const { return counts.size(); }
  std::size_t categories() const { return counts.empty() ? 0 : counts.front().size(); }
  int raters() const {
    int n = 0;
    if (!counts.empty())
      for (int c : counts.front()) n += c;
    return n;
  }

  // Builds the matrix from raw category labels per item.
  static RatingMatrix from_labels(const std::vector<std::vector<int>>& labels,
                                  std::size_t n_categories) {
    RatingMatrix m;
    for (const auto& row : labels) {
      std::vector<int> c(n_categories, 0);
      for (int l : row) {
        if (l < 0 || static_cast<std::size_t>(l) >= n_categories)
          throw Error("rating outside category range");
        ++c[l];
      }
      m.counts.push_back(std::move(c));
    }
    return m;
  }
};

inline double fleiss_kappa(const RatingMatrix& m) {
  if (m.items() < 2) throw Error("fleiss_kappa: need at least 2 items");
  const std::size_t k = m.categories();
  if (k < 2) throw Error("fleiss_kappa: need at least 2 categories");
  const int n = m.raters();
  if (n < 2) throw Error("fleiss_kappa: need at least 2 raters per item");
  std::vector<double> col(k, 0.0);
  double p_bar = 0.0;
  for (const auto& row : m.counts) {
    if (row.size() != k) throw Error("fleiss_kappa: ragged category counts");
    int sum = 0;
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] < 0) throw Error("fleiss_kappa: negative count");
      sum += row[j];
      sq += static_cast<double>(row[j]) * row[j];
      col[j] += row[j];
    }
    if (sum != n) throw Error("fleiss_kappa: rows have different rater counts");
    p_bar += (sq - n) / (static_cast<double>(n) * (n - 1));
  }
  const double N = static_cast<double>(m.items());
  p_bar /= N;
  double p_e = 0.0;
  for (double c : col) {
    const double p = c / (N * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) {
    // Every rating fell in one category.
    if (p_bar >= 1.0) return 1.0;
    throw Error("fleiss_kappa: undefined (chance agreement is 1)");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

// Gold label: expert label where present, otherwise the resolved worker consensus.
inline std::map<std::string, int> resolve_gold(const std::map<std::string, int>& expert,
                                               const std::map<std::string, std::optional<int>>& consensus) {
  std::map<std::string, int> gold = expert;
  for (const auto& [item, label] : consensus)
    if (label && !gold.count(item)) gold.emplace(item, *label);
  return gold;
}

// Consensus per non-control item over the given (already valid) responses.
inline std::map<std::string, std::optional<int>> consensus_labels(
    std::span<const WorkerResponse> valid, const std::map<std::string, AssignmentSpec>& assignments) {
  std::map<std::string, std::vector<int>> per_item;
  for (const auto& r : valid) {
    const auto& spec = assignments.at(r.assignment_id);
    for (const auto& [item, a] : r.answers)
      if (!spec.is_control(item)) per_item[item].push_back(a);
  }
  std::map<std::string, std::optional<int>> out;
  for (const auto& [item, answers] : per_item) out.emplace(item, consensus_label(answers));
  return out;
}

// Cohen's kappa of each worker's non-control answers against gold, pooled over
// all of that worker's responses. Workers with no gold-labelled answers are omitted.
inline std::map<std::string, double> per_worker_kappa(
    std::span<const WorkerResponse> responses, const std::map<std::string, AssignmentSpec>& assignments,
    const std::map<std::string, int>& gold) {
  std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> seqs;
  for (const auto& r : responses) {
    const auto& spec = assignments.at(r.assignment_id);
    auto& [worker, truth] = seqs[r.worker_id];
    for (const auto& [item, a] : r.answers) {
      if (spec.is_control(item)) continue;
      auto g = gold.find(item);
      if (g == gold.end()) continue;
      worker.push_back(a);
      truth.push_back(g->second);
    }
  }
  std::map<std::string, double> out;
  for (const auto& [worker, pair] : seqs)
    if (!pair.first.empty()) out.emplace(worker, cohen_kappa(pair.first, pair.second));
  return out;
}

enum class CutoffDirection { Lower, Upper };

inline std::string_view to_string(CutoffDirection d) {
  return d == CutoffDirection::Lower ? "LOWER" : "UPPER";
}

struct SweepRow {
  double cutoff_s = 0.0;
  CutoffDirection direction = CutoffDirection::Lower;
  std::size_t n_retained = 0;
  std::optional<double> mean_kappa;  // missing when nothing is retained
};

// LOWER keeps responses with duration >= cutoff, UPPER keeps duration <= cutoff.
// Expects responses that already passed the control check.
inline std::vector<SweepRow> cutoff_sweep(std::span<const WorkerResponse> responses,
                                          const std::map<std::string, AssignmentSpec>& assignments,
                                          const std::map<std::string, int>& gold,
                                          std::span<const double> cutoffs, CutoffDirection direction) {
  if (cutoffs.empty()) throw Error("cutoff_sweep: empty cutoff list");
  std::vector<SweepRow> rows;
  std::vector<WorkerResponse> kept;
  for (double cutoff : cutoffs) {
    kept.clear();
    for (const auto& r : responses) {
      const bool keep = direction == CutoffDirection::Lower ? r.duration_s >= cutoff
                                                            : r.duration_s <= cutoff;
      if (keep) kept.push_back(r);
    }
    SweepRow row{cutoff, direction, kept.size(), std::nullopt};
    auto kappas = per_worker_kappa(kept, assignments, gold);
    if (!kappas.empty()) {
      double sum = 0.0;
      for (const auto& [w, k] : kappas) sum += k;
      row.mean_kappa = sum / static_cast<double>(kappas.size());
    }
    rows.push_back(row);
  }
  return rows;
}

// 0, 10, ..., 300 seconds.
inline std::vector<double> default_cutoffs() {
  std::vector<double> c;
  for (int s = 0; s <= 300; s += 10) c.push_back(s);
  return c;
}

struct Reliability {
  double mean = 0.0;
  double lower = 0.0;  // 2.5th percentile of per-trial kappa
  double upper = 0.0;  // 97.5th percentile
  std::size_t trials = 0;
  std::size_t items = 0;
};

namespace detail {

inline double percentile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// Fleiss' kappa over random k-rater subsets per item. Trial t draws from an
// RNG stream derived from (seed, t), so results do not depend on evaluation order.
inline Reliability worker_subset_reliability(const std::vector<std::vector<int>>& per_item, std::size_t k,
                                             std::size_t trials, std::uint64_t seed,
                                             std::size_t n_categories = 2) {
  if (trials == 0) throw Error("worker_subset_reliability: trials must be >= 1");
  if (k < 2) throw Error("worker_subset_reliability: k must be >= 2");
  for (std::size_t i = 0; i < per_item.size(); ++i)
    if (per_item[i].size() < k)
      throw Error("worker_subset_reliability: item " + std::to_string(i) + " has " +
                  std::to_string(per_item[i].size()) + " responses, fewer than k=" + std::to_string(k));
  std::vector<double> kappas;
  kappas.reserve(trials);
  std::vector<std::vector<int>> subset(per_item.size());
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {t}));
    for (std::size_t i = 0; i < per_item.size(); ++i)
      subset[i] = sample_without_replacement<int>(per_item[i], k, rng);
    kappas.push_back(fleiss_kappa(RatingMatrix::from_labels(subset, n_categories)));
  }
  Reliability r;
  double sum = 0.0;
  for (double v : kappas) sum += v;
  r.mean = sum / static_cast<double>(trials);
  r.lower = detail::percentile(kappas, 0.025);
  r.upper = detail::percentile(kappas, 0.975);
  r.trials = trials;
  r.items = per_item.size();
  return r;
}

// ---- files ----

inline std::map<std::string, AssignmentSpec> read_assignments(const std::filesystem::path& path) {
  std::map<std::string, AssignmentSpec> out;
  io::for_each_jsonl(path, [&](std::size_t, const io::Json& obj) {
    AssignmentSpec spec;
    spec.assignment_id = obj.at("assignment_id").get<std::string>();
    spec.item_ids = obj.at("item_ids").get<std::vector<std::string>>();
    for (const auto& [item, answer] : obj.at("controls").items())
      spec.control_items.emplace(item, answer.get<int>());
    check_assignment(spec);
    if (out.count(spec.assignment_id))
      throw Error("duplicate assignment id " + spec.assignment_id);
    out.emplace(spec.assignment_id, std::move(spec));
  });
  return out;
}

inline std::vector<WorkerResponse> read_responses(const std::filesystem::path& path) {
  std::vector<WorkerResponse> out;
  io::for_each_jsonl(path, [&](std::size_t, const io::Json& obj) {
    WorkerResponse r;
    r.assignment_id = obj.at("assignment_id").get<std::string>();
    r.worker_id = obj.at("worker_id").get<std::string>();
    r.duration_s = obj.at("duration_s").get<double>();
    for (const auto& [item, answer] : obj.at("answers").items()) r.answers.emplace(item, answer.get<int>());
    out.push_back(std::move(r));
  });
  return out;
}

inline std::map<std::string, int> read_gold(const std::filesystem::path& path) {
  std::map<std::string, int> out;
  io::for_each_jsonl(path, [&](std::size_t, const io::Json& obj) {
    const auto id = obj.at("id").get<std::string>();
    const int label = obj.at("label").get<int>();
    if (label != 0 && label != 1) throw Error("\"label\" must be 0 or 1");
    out[id] = label;
  });
  return out;
}

inline std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = "cutoff_s,direction,n_retained,mean_kappa\n";
  for (const auto& r : rows) {
    out += io::fmt_double(r.cutoff_s);
    out += ',';
    out += to_string(r.direction);
    out += ',';
    out += std::to_string(r.n_retained);
    out += ',';
    if (r.mean_kappa) out += io::fmt_double(*r.mean_kappa);
    out += '\n';
  }
  return out;
}

}  // namespace alcrowd::qc
