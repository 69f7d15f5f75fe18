#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "alcrowd/error.hpp"

namespace alcrowd::learners {

struct Metrics {
  double precision = 0.0;  // positive class
  double recall = 0.0;
  double f1_pos = 0.0;
  double f1_weighted = 0.0;  // support-weighted mean of per-class F1
  double accuracy = 0.0;
  std::array<std::size_t, 2> support{};  // true count per class
  bool precision_undefined = false;      // no positive predictions
  bool recall_undefined = false;         // no positive examples

  bool operator==(const Metrics&) const = default;
};

namespace detail {

struct ClassScores {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool precision_undefined = false, recall_undefined = false;
};

inline ClassScores class_scores(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassScores s;
  if (tp + fp == 0) s.precision_undefined = true;
  else s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn == 0) s.recall_undefined = true;
  else s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

}  // namespace detail

// Binary metrics from true and predicted 0/1 labels. Undefined ratios are 0 and flagged.
inline Metrics compute_metrics(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw Error("truth and prediction counts differ");
  if (truth.empty()) throw Error("cannot evaluate on an empty test set");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) (pred[i] == 1 ? tp : fn)++;
    else (pred[i] == 1 ? fp : tn)++;
  }
  Metrics m;
  const auto pos = detail::class_scores(tp, fp, fn);
  const auto neg = detail::class_scores(tn, fn, fp);
  m.precision = pos.precision;
  m.recall = pos.recall;
  m.f1_pos = pos.f1;
  m.precision_undefined = pos.precision_undefined;
  m.recall_undefined = pos.recall_undefined;
  m.support = {tn + fp, tp + fn};
  const double n = static_cast<double>(truth.size());
  m.f1_weighted = (neg.f1 * static_cast<double>(m.support[0]) + pos.f1 * static_cast<double>(m.support[1])) / n;
  m.accuracy = static_cast<double>(tp + tn) / n;
  return m;
}

struct Interval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Student-t confidence interval for the mean: mean +- t_{(1+level)/2, n-1} s / sqrt(n).
inline Interval mean_ci(std::span<const double> values, double level = 0.95) {
  if (values.size() < 2) throw Error("mean_ci needs at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw Error("confidence level must be in (0, 1)");
  const double n = static_cast<double>(values.size());
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }))
    return {values[0], values[0], values[0]};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  const boost::math::students_t dist(n - 1);
  const double t = boost::math::quantile(dist, 0.5 * (1.0 + level));
  const double half = t * sd / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

}  // namespace alcrowd::learners
