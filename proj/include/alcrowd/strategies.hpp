#pragma once

// Informativeness scores for pool-based active learning and batch selection.
// All logarithms are natural.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alcrowd/error.hpp"
#include "alcrowd/learners.hpp"
#include "alcrowd/rng.hpp"

namespace alcrowd::strategies {

using learners::ProbDist;
using learners::TrainedModel;

enum class StrategyKind { Random, LeastConfident, Entropy, VoteEntropy, KlDivergence };

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::Random: return "random";
    case StrategyKind::LeastConfident: return "least_confident";
    case StrategyKind::Entropy: return "entropy";
    case StrategyKind::VoteEntropy: return "vote_entropy";
    case StrategyKind::KlDivergence: return "kl_divergence";
  }
  return "?";
}

inline StrategyKind parse_strategy(std::string_view s) {
  if (s == "random") return StrategyKind::Random;
  if (s == "least_confident") return StrategyKind::LeastConfident;
  if (s == "entropy") return StrategyKind::Entropy;
  if (s == "vote_entropy") return StrategyKind::VoteEntropy;
  if (s == "kl_divergence") return StrategyKind::KlDivergence;
  throw Error("unknown strategy '" + std::string(s) +
              "' (expected random, least_confident, entropy, vote_entropy or kl_divergence)");
}

inline bool is_committee_strategy(StrategyKind k) {
  return k == StrategyKind::VoteEntropy || k == StrategyKind::KlDivergence;
}

// 1 - max_y p(y).
inline double least_confident_score(const ProbDist& p) {
  learners::check_dist(p);
  return 1.0 - *std::max_element(p.probs.begin(), p.probs.end());
}

// -sum p ln p, with 0 ln 0 = 0.
inline double entropy_score(const ProbDist& p) {
  learners::check_dist(p);
  double h = 0.0;
  for (double v : p.probs)
    if (v > 0) h -= v * std::log(v);
  return std::max(0.0, h);
}

// Entropy of the committee's hard-vote distribution.
inline double vote_entropy_score(std::span<const int> votes, std::size_t n_classes) {
  if (votes.empty()) throw Error("vote entropy over an empty vote list");
  std::vector<std::size_t> counts(n_classes, 0);
  for (int v : votes) {
    if (v < 0 || static_cast<std::size_t>(v) >= n_classes) throw Error("vote outside the class range");
    ++counts[static_cast<std::size_t>(v)];
  }
  const double c = static_cast<double>(votes.size());
  double h = 0.0;
  for (auto n : counts)
    if (n > 0) h -= (n / c) * std::log(n / c);
  return std::max(0.0, h);
}

// Mean KL divergence of each member distribution from the componentwise mean.
inline double kl_qbc_score(std::span<const ProbDist> members) {
  if (members.size() < 2) throw Error("KL query-by-committee needs at least 2 members");
  const std::size_t k = members.front().size();
  for (const auto& p : members) {
    learners::check_dist(p);
    if (p.size() != k) throw Error("committee members disagree on the number of classes");
  }
  const double c = static_cast<double>(members.size());
  std::vector<double> consensus(k, 0.0);
  for (const auto& p : members)
    for (std::size_t y = 0; y < k; ++y) consensus[y] += p[y] / c;
  double total = 0.0;
  for (const auto& p : members)
    for (std::size_t y = 0; y < k; ++y)
      if (p[y] > 0) total += p[y] * std::log(p[y] / consensus[y]);
  return std::max(0.0, total / c);
}

struct ScoredId {
  std::string id;
  double score = 0.0;
};

// The k highest scores; equal scores are ordered by ascending id.
inline std::vector<std::string> select_batch(std::span<const ScoredId> scores, std::size_t k) {
  if (scores.empty()) throw Error("select_batch over an empty pool");
  if (k == 0) throw Error("batch size must be >= 1");
  std::vector<const ScoredId*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) {
    if (std::isnan(s.score)) throw Error("score for " + s.id + " is NaN");
    order.push_back(&s);
  }
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [](const ScoredId* a, const ScoredId* b) {
                      return a->score != b->score ? a->score > b->score : a->id < b->id;
                    });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(order[i]->id);
  return out;
}

// Uniform sample of k ids without replacement.
inline std::vector<std::string> random_batch(std::span<const std::string> pool, std::size_t k, std::uint64_t seed) {
  if (k > pool.size())
    throw Error("random batch of " + std::to_string(k) + " from a pool of " + std::to_string(pool.size()));
  Rng rng(seed);
  return sample_without_replacement<std::string>(pool, k, rng);
}

// Two or more models over the same classes and feature space.
class Committee {
 public:
  explicit Committee(std::vector<TrainedModel> members) : members_(std::move(members)) {
    if (members_.size() < 2) throw Error("a committee needs at least 2 members");
    for (const auto& m : members_)
      if (m.vocab_size() != members_.front().vocab_size())
        throw Error("committee members disagree on the feature dimension");
  }

  const std::vector<TrainedModel>& members() const { return members_; }

  std::vector<ProbDist> member_dists(const learners::SparseVector& x) const {
    std::vector<ProbDist> out;
    out.reserve(members_.size());
    for (const auto& m : members_) out.push_back(m.predict_proba(x));
    return out;
  }

  std::vector<int> votes(const learners::SparseVector& x) const {
    std::vector<int> out;
    out.reserve(members_.size());
    for (const auto& m : members_) out.push_back(m.predict(x));
    return out;
  }

  // Majority vote of members; a tied vote goes to the class with the larger
  // mean member probability, then to the lower class index.
  int predict(const learners::SparseVector& x) const {
    const auto dists = member_dists(x);
    std::vector<double> count(learners::kNumClasses, 0.0), mass(learners::kNumClasses, 0.0);
    for (const auto& p : dists) {
      count[p.argmax()] += 1.0;
      for (std::size_t y = 0; y < p.size(); ++y) mass[y] += p[y];
    }
    std::size_t best = 0;
    for (std::size_t y = 1; y < count.size(); ++y)
      if (count[y] > count[best] || (count[y] == count[best] && mass[y] > mass[best])) best = y;
    return static_cast<int>(best);
  }

 private:
  std::vector<TrainedModel> members_;
};

inline double committee_score(StrategyKind kind, const Committee& committee, const learners::SparseVector& x) {
  switch (kind) {
    case StrategyKind::VoteEntropy: return vote_entropy_score(committee.votes(x), learners::kNumClasses);
    case StrategyKind::KlDivergence: return kl_qbc_score(committee.member_dists(x));
    default: throw Error(std::string(to_string(kind)) + " is not a committee strategy");
  }
}

inline double single_model_score(StrategyKind kind, const TrainedModel& model, const learners::SparseVector& x) {
  switch (kind) {
    case StrategyKind::LeastConfident: return least_confident_score(model.predict_proba(x));
    case StrategyKind::Entropy: return entropy_score(model.predict_proba(x));
    default: throw Error(std::string(to_string(kind)) + " is not a single-model strategy");
  }
}

}  // namespace alcrowd::strategies
