#pragma once

// Classical text classifiers behind one model type: logistic regression,
// multinomial naive Bayes, random forest and linear SVM.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "alcrowd/io.hpp"
#include "alcrowd/learners/common.hpp"
#include "alcrowd/learners/linear_svm.hpp"
#include "alcrowd/learners/logistic.hpp"
#include "alcrowd/learners/metrics.hpp"
#include "alcrowd/learners/naive_bayes.hpp"
#include "alcrowd/learners/random_forest.hpp"

namespace alcrowd::learners {

enum class LearnerKind { LR, NB, RF, SVM };

inline std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::LR: return "lr";
    case LearnerKind::NB: return "nb";
    case LearnerKind::RF: return "rf";
    case LearnerKind::SVM: return "svm";
  }
  return "?";
}

inline LearnerKind parse_learner(std::string_view s) {
  if (s == "lr") return LearnerKind::LR;
  if (s == "nb") return LearnerKind::NB;
  if (s == "rf") return LearnerKind::RF;
  if (s == "svm") return LearnerKind::SVM;
  throw Error("unknown learner '" + std::string(s) + "' (expected lr, nb, rf or svm)");
}

struct Hyperparams {
  LogisticParams lr;
  NaiveBayesParams nb;
  ForestParams rf;
  SvmParams svm;
};

class TrainedModel {
 public:
  using Params = std::variant<LogisticModel, NaiveBayesModel, ForestModel, SvmModel>;

  TrainedModel(LearnerKind kind, Params params, std::size_t dim, std::uint64_t seed)
      : kind_(kind), params_(std::move(params)), dim_(dim), seed_(seed) {}

  LearnerKind kind() const { return kind_; }
  std::size_t vocab_size() const { return dim_; }
  std::uint64_t train_seed() const { return seed_; }
  const Params& params() const { return params_; }

  ProbDist predict_proba(const SparseVector& x) const {
    check_vector(x, dim_);
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, params_);
  }

  int predict(const SparseVector& x) const { return static_cast<int>(predict_proba(x).argmax()); }

 private:
  LearnerKind kind_;
  Params params_;
  std::size_t dim_;
  std::uint64_t seed_;
};

// Requires a non-empty training set containing both classes. The result is a
// deterministic function of (kind, data, hyperparams, seed).
inline TrainedModel fit(LearnerKind kind, const Examples& data, const Hyperparams& hp, std::uint64_t seed) {
  check_training_set(data);
  switch (kind) {
    case LearnerKind::LR: return {kind, fit_logistic(data, hp.lr), data.dim, seed};
    case LearnerKind::NB: return {kind, fit_naive_bayes(data, hp.nb), data.dim, seed};
    case LearnerKind::RF: return {kind, fit_forest(data, hp.rf, seed), data.dim, seed};
    case LearnerKind::SVM: return {kind, fit_svm(data, hp.svm), data.dim, seed};
  }
  throw Error("unknown learner kind");
}

inline ProbDist predict_proba(const TrainedModel& model, const SparseVector& x) { return model.predict_proba(x); }

inline Metrics evaluate(const TrainedModel& model, std::span<const SparseVector> xs, std::span<const int> ys) {
  if (xs.empty()) throw Error("cannot evaluate on an empty test set");
  std::vector<int> pred;
  pred.reserve(xs.size());
  for (const auto& x : xs) pred.push_back(model.predict(x));
  return compute_metrics(ys, pred);
}

inline io::Json hyperparams_to_json(LearnerKind kind, const Hyperparams& hp) {
  io::Json j = io::Json::object();
  switch (kind) {
    case LearnerKind::LR:
      j = {{"max_iter", hp.lr.max_iter}, {"learning_rate", hp.lr.learning_rate}, {"l2", hp.lr.l2}};
      break;
    case LearnerKind::NB: j = {{"alpha", hp.nb.alpha}}; break;
    case LearnerKind::RF:
      j = {{"n_trees", hp.rf.n_trees}, {"max_depth", hp.rf.max_depth},
           {"min_samples_leaf", hp.rf.min_samples_leaf}, {"max_features", hp.rf.max_features},
           {"bootstrap", hp.rf.bootstrap}};
      break;
    case LearnerKind::SVM:
      j = {{"c", hp.svm.c}, {"max_iter", hp.svm.max_iter}, {"step0", hp.svm.step0},
           {"prob_scale", hp.svm.prob_scale}};
      break;
  }
  return j;
}

inline io::Json metrics_to_json(const Metrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1_pos", m.f1_pos},
          {"f1_weighted", m.f1_weighted},
          {"accuracy", m.accuracy},
          {"support", {m.support[0], m.support[1]}},
          {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined}};
}

inline io::Json model_summary(const TrainedModel& model, const Hyperparams& hp,
                              const std::optional<Metrics>& metrics = std::nullopt) {
  io::Json j = {{"kind", to_string(model.kind())},
                {"hyperparameters", hyperparams_to_json(model.kind(), hp)},
                {"vocab_size", model.vocab_size()},
                {"seed", model.train_seed()}};
  if (metrics) j["metrics"] = metrics_to_json(*metrics);
  return j;
}

}  // namespace alcrowd::learners
