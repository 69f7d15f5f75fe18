#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alcrowd/corpus.hpp"
#include "alcrowd/error.hpp"

namespace alcrowd::learners {

using corpus::SparseVector;

inline constexpr std::size_t kNumClasses = 2;

// Per-class probabilities; components are non-negative and sum to 1.
struct ProbDist {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }

  // Index of the largest component; ties go to the lowest index.
  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best]) best = i;
    return best;
  }

  bool operator==(const ProbDist&) const = default;
};

inline void check_dist(const ProbDist& p, double tol = 1e-9) {
  if (p.size() < 2) throw Error("probability vector needs at least 2 classes");
  double sum = 0.0;
  for (double v : p.probs) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("probability components must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw Error("probabilities sum to " + std::to_string(sum) + ", not 1");
}

inline double dot(const SparseVector& x, std::span<const double> w) {
  double s = 0.0;
  for (const auto& e : x.entries) s += e.weight * w[e.index];
  return s;
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline ProbDist binary_dist(double p_positive) { return ProbDist{{1.0 - p_positive, p_positive}}; }

// Training examples as parallel spans; every feature index must be < dim.
struct Examples {
  std::span<const SparseVector> x;
  std::span<const int> y;
  std::size_t dim = 0;

  std::size_t size() const { return x.size(); }
};

inline void check_vector(const SparseVector& x, std::size_t dim) {
  if (!x.entries.empty() && x.entries.back().index >= dim)
    throw Error("feature index " + std::to_string(x.entries.back().index) +
                " out of range for dimension " + std::to_string(dim));
}

inline void check_training_set(const Examples& data) {
  if (data.x.size() != data.y.size()) throw Error("feature and label counts differ");
  if (data.x.empty()) throw Error("empty training set");
  bool seen[kNumClasses] = {false, false};
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.y[i] != 0 && data.y[i] != 1) throw Error("labels must be 0 or 1");
    seen[data.y[i]] = true;
    check_vector(data.x[i], data.dim);
  }
  if (!seen[0] || !seen[1]) throw Error("training set contains a single class");
}

}  // namespace alcrowd::learners
