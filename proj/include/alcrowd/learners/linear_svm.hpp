#pragma once

// Linear SVM: hinge loss minimized by deterministic full-batch subgradient
// descent. Probabilities come from a fixed-scale sigmoid of the margin.

#include <cmath>
#include <limits>
#include <vector>

#include "alcrowd/learners/common.hpp"

namespace alcrowd::learners {

struct SvmParams {
  double c = 1.0;
  int max_iter = 500;
  double step0 = 1.0;      // step at iteration t is step0 / sqrt(t)
  double prob_scale = 1.0; // p(positive) = sigmoid(prob_scale * margin)
};

struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double prob_scale = 1.0;

  double margin(const SparseVector& x) const { return dot(x, weights) + bias; }
  ProbDist predict_proba(const SparseVector& x) const {
    return binary_dist(sigmoid(prob_scale * margin(x)));
  }
};

// (1/(2Cn))|w|^2 + mean hinge loss; the same minimizer as (1/2)|w|^2 + C * sum hinge.
inline double svm_objective(std::span<const double> w, double b, const Examples& data, double c,
                            std::vector<double>* grad_w = nullptr, double* grad_b = nullptr) {
  const double n = static_cast<double>(data.size());
  const double lambda = 1.0 / (c * n);
  double loss = 0.0;
  if (grad_w) grad_w->assign(w.size(), 0.0);
  double gb = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.y[i] == 1 ? 1.0 : -1.0;
    const double m = y * (dot(data.x[i], w) + b);
    if (m < 1.0) {
      loss += 1.0 - m;
      if (grad_w)
        for (const auto& e : data.x[i].entries) (*grad_w)[e.index] -= y * e.weight;
      gb -= y;
    }
  }
  double sq = 0.0;
  for (double v : w) sq += v * v;
  if (grad_w)
    for (std::size_t j = 0; j < w.size(); ++j) (*grad_w)[j] = (*grad_w)[j] / n + lambda * w[j];
  if (grad_b) *grad_b = gb / n;
  return loss / n + 0.5 * lambda * sq;
}

// Returns the iterate with the lowest objective seen.
inline SvmModel fit_svm(const Examples& data, const SvmParams& params) {
  if (!(params.c > 0)) throw Error("SVM C must be > 0");
  std::vector<double> w(data.dim, 0.0), grad;
  double b = 0.0, grad_b = 0.0;
  SvmModel best;
  best.weights = w;
  best.prob_scale = params.prob_scale;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= params.max_iter + 1; ++it) {
    const double obj = svm_objective(w, b, data, params.c, &grad, &grad_b);
    if (obj < best_obj) {
      best_obj = obj;
      best.weights = w;
      best.bias = b;
    }
    if (it > params.max_iter) break;
    const double step = params.step0 / std::sqrt(static_cast<double>(it));
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= step * grad[j];
    b -= step * grad_b;
  }
  return best;
}

}  // namespace alcrowd::learners
