#pragma once

// L2-regularized logistic regression trained by full-batch gradient descent.

#include <span>
#include <vector>

#include "alcrowd/learners/common.hpp"

namespace alcrowd::learners {

struct LogisticParams {
  int max_iter = 500;
  double learning_rate = 0.1;
  double l2 = 1e-4;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double score(const SparseVector& x) const { return dot(x, weights) + bias; }
  ProbDist predict_proba(const SparseVector& x) const { return binary_dist(sigmoid(score(x))); }
};

// Mean log-loss plus (l2/2)|w|^2; the bias is not penalized. Writes the
// gradient when grad_w/grad_b are non-null.
inline double logistic_objective(std::span<const double> w, double b, const Examples& data, double l2,
                                 std::vector<double>* grad_w = nullptr, double* grad_b = nullptr) {
  const double n = static_cast<double>(data.size());
  double loss = 0.0;
  if (grad_w) grad_w->assign(w.size(), 0.0);
  double gb = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = dot(data.x[i], w) + b;
    const double y = data.y[i];
    // log(1 + e^z) - y z, evaluated stably
    loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y * z;
    const double r = sigmoid(z) - y;
    if (grad_w)
      for (const auto& e : data.x[i].entries) (*grad_w)[e.index] += r * e.weight;
    gb += r;
  }
  double sq = 0.0;
  for (double v : w) sq += v * v;
  if (grad_w)
    for (std::size_t j = 0; j < w.size(); ++j) (*grad_w)[j] = (*grad_w)[j] / n + l2 * w[j];
  if (grad_b) *grad_b = gb / n;
  return loss / n + 0.5 * l2 * sq;
}

inline LogisticModel fit_logistic(const Examples& data, const LogisticParams& params) {
  LogisticModel m;
  m.weights.assign(data.dim, 0.0);
  std::vector<double> grad;
  double grad_b = 0.0;
  for (int it = 0; it < params.max_iter; ++it) {
    logistic_objective(m.weights, m.bias, data, params.l2, &grad, &grad_b);
    for (std::size_t j = 0; j < m.weights.size(); ++j) m.weights[j] -= params.learning_rate * grad[j];
    m.bias -= params.learning_rate * grad_b;
  }
  return m;
}

}  // namespace alcrowd::learners
