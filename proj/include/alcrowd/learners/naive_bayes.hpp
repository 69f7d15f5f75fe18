#pragma once

// Multinomial naive Bayes with additive (Laplace) smoothing.

#include <array>
#include <cmath>
#include <vector>

#include "alcrowd/learners/common.hpp"

namespace alcrowd::learners {

struct NaiveBayesParams {
  double alpha = 1.0;
};

struct NaiveBayesModel {
  std::array<double, kNumClasses> log_prior{};
  std::array<std::vector<double>, kNumClasses> log_likelihood;  // [class][feature]

  ProbDist predict_proba(const SparseVector& x) const {
    std::array<double, kNumClasses> lp{};
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      lp[c] = log_prior[c];
      for (const auto& e : x.entries) lp[c] += e.weight * log_likelihood[c][e.index];
    }
    const double mx = std::max(lp[0], lp[1]);
    double z = 0.0;
    ProbDist p{std::vector<double>(kNumClasses)};
    for (std::size_t c = 0; c < kNumClasses; ++c) z += (p.probs[c] = std::exp(lp[c] - mx));
    for (auto& v : p.probs) v /= z;
    return p;
  }
};

inline NaiveBayesModel fit_naive_bayes(const Examples& data, const NaiveBayesParams& params) {
  if (!(params.alpha > 0)) throw Error("naive Bayes smoothing alpha must be > 0");
  NaiveBayesModel m;
  std::array<double, kNumClasses> docs{};
  std::array<std::vector<double>, kNumClasses> counts;
  for (auto& c : counts) c.assign(data.dim, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.y[i];
    docs[y] += 1.0;
    for (const auto& e : data.x[i].entries) counts[y][e.index] += e.weight;
  }
  const double n = static_cast<double>(data.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    m.log_prior[c] = std::log(docs[c] / n);
    double total = 0.0;
    for (double v : counts[c]) total += v;
    const double denom = std::log(total + params.alpha * static_cast<double>(data.dim));
    m.log_likelihood[c].resize(data.dim);
    for (std::size_t j = 0; j < data.dim; ++j)
      m.log_likelihood[c][j] = std::log(counts[c][j] + params.alpha) - denom;
  }
  return m;
}

}  // namespace alcrowd::learners
