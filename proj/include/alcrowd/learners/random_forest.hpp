#pragma once

// Random forest of Gini-impurity classification trees over sparse count
// features. Split search only touches the non-zero entries of the samples in
// a node; a sample missing a feature has value 0 for it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "alcrowd/learners/common.hpp"
#include "alcrowd/rng.hpp"

namespace alcrowd::learners {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;         // 0 = unlimited
  int min_samples_leaf = 1;
  int max_features = 0;      // 0 = ceil(sqrt(dim))
  bool bootstrap = true;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint8_t label = 0;     // majority class, leaves only
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  int predict(const SparseVector& x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const auto& n = nodes[i];
      i = x.at(static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes[i].label;
  }

  // Same walk over a dense row; features past its end read as 0.
  int predict_dense(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const auto& n = nodes[i];
      const auto f = static_cast<std::size_t>(n.feature);
      i = (f < row.size() ? row[f] : 0.0) <= n.threshold ? n.left : n.right;
    }
    return nodes[i].label;
  }
};

struct ForestModel {
  std::vector<DecisionTree> trees;

  // Fraction of trees voting for each class.
  ProbDist predict_proba(const SparseVector& x) const {
    thread_local std::vector<double> row;
    std::size_t width = 0;
    for (const auto& e : x.entries) width = std::max<std::size_t>(width, e.index + 1);
    if (row.size() < width) row.resize(width, 0.0);
    for (const auto& e : x.entries) row[e.index] = e.weight;
    std::array<double, kNumClasses> votes{};
    for (const auto& t : trees) votes[t.predict_dense(row)] += 1.0;
    for (const auto& e : x.entries) row[e.index] = 0.0;
    const double n = static_cast<double>(trees.size());
    return ProbDist{{votes[0] / n, votes[1] / n}};
  }
};

namespace detail {

// Training rows in compressed sparse row form, plus a column index.
struct CsrRows {
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
  std::vector<std::uint8_t> label;
  std::vector<std::size_t> col_ptr;     // column f occupies [col_ptr[f], col_ptr[f + 1])
  std::vector<std::uint32_t> col_row;   // rows ascending within a column
  std::vector<double> col_val;

  explicit CsrRows(const Examples& data) {
    row_ptr.reserve(data.size() + 1);
    row_ptr.push_back(0);
    col_ptr.assign(data.dim + 1, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (const auto& e : data.x[i].entries) {
        col.push_back(e.index);
        val.push_back(e.weight);
        ++col_ptr[e.index + 1];
      }
      row_ptr.push_back(col.size());
      label.push_back(static_cast<std::uint8_t>(data.y[i]));
    }
    for (std::size_t f = 0; f < data.dim; ++f) col_ptr[f + 1] += col_ptr[f];
    col_row.resize(col.size());
    col_val.resize(col.size());
    std::vector<std::size_t> next(col_ptr.begin(), col_ptr.end() - 1);
    for (std::size_t r = 0; r + 1 < row_ptr.size(); ++r)
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        const auto at = next[col[k]]++;
        col_row[at] = static_cast<std::uint32_t>(r);
        col_val[at] = val[k];
      }
  }
};

// Grows one tree over distinct rows weighted by bootstrap multiplicity. Each
// node's rows occupy a contiguous range of order_ and carry the node's tag,
// so a split only touches the rows in the split column: those on the side
// without zeros are retagged and moved to the end of the range.
class TreeBuilder {
 public:
  TreeBuilder(const CsrRows& rows, std::size_t dim, const ForestParams& params, std::size_t mtry)
      : rows_(rows), params_(params), mtry_(mtry), dim_(dim), stamp_(dim, 0), count_(dim), vmin_(dim), vmax_(dim),
        slot_stamp_(dim, 0), slot_(dim), perm_(dim), pos_(rows.label.size()), weight_(rows.label.size()),
        tag_(rows.label.size(), 0) {
    const std::size_t n = rows.label.size();
    avg_nnz_ = n ? static_cast<double>(rows.col.size()) / static_cast<double>(n) : 0.0;
  }

  // weights[r] is how often row r was drawn; rows with weight 0 are left out.
  DecisionTree build(std::span<const std::uint32_t> weights, Rng& rng) {
    DecisionTree tree;
    for (std::uint32_t f = 0; f < dim_; ++f) perm_[f] = f;
    struct Task {
      std::size_t node, begin, end;
      int depth;
      std::uint64_t tag;
      std::array<double, kNumClasses> totals;
    };
    Task root{0, 0, 0, 0, ++next_tag_, {}};
    order_.clear();
    for (std::uint32_t r = 0; r < weights.size(); ++r) {
      weight_[r] = weights[r];
      if (weights[r] == 0) continue;
      pos_[r] = static_cast<std::uint32_t>(order_.size());
      tag_[r] = root.tag;
      order_.push_back(r);
      root.totals[rows_.label[r]] += weights[r];
    }
    root.end = order_.size();
    tree.nodes.push_back({});
    std::vector<Task> stack{root};
    const auto min_leaf = static_cast<double>(std::max(1, params_.min_samples_leaf));
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      Split split;
      const auto& totals = t.totals;
      const bool pure = totals[0] == 0 || totals[1] == 0;
      const bool depth_capped = params_.max_depth > 0 && t.depth >= params_.max_depth;
      if (pure || depth_capped || totals[0] + totals[1] < 2 * min_leaf ||
          !find_split(t.begin, t.end, t.tag, totals, rng, split)) {
        tree.nodes[t.node].label = totals[1] > totals[0] ? 1 : 0;
        continue;
      }

      // Rows absent from the split column hold 0; collect the other side.
      const bool zero_left = 0.0 <= split.threshold;
      const std::uint64_t moved_tag = ++next_tag_;
      std::array<double, kNumClasses> moved_totals{};
      moved_.clear();
      for (std::size_t k = rows_.col_ptr[split.feature]; k < rows_.col_ptr[split.feature + 1]; ++k) {
        const auto r = rows_.col_row[k];
        if (tag_[r] != t.tag || (rows_.col_val[k] <= split.threshold) == zero_left) continue;
        tag_[r] = moved_tag;
        moved_.push_back(r);
        moved_totals[rows_.label[r]] += weight_[r];
      }
      const std::size_t zone = t.end - moved_.size();
      std::size_t free_slot = zone;
      for (auto r : moved_) {
        if (pos_[r] >= zone) continue;
        while (tag_[order_[free_slot]] == moved_tag) ++free_slot;
        const auto other = order_[free_slot];
        order_[pos_[r]] = other;
        pos_[other] = pos_[r];
        order_[free_slot] = r;
        pos_[r] = static_cast<std::uint32_t>(free_slot);
      }
      std::array<double, kNumClasses> kept_totals{totals[0] - moved_totals[0], totals[1] - moved_totals[1]};

      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      auto& node = tree.nodes[t.node];
      node.feature = static_cast<std::int32_t>(split.feature);
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      const Task kept{0, t.begin, zone, t.depth + 1, t.tag, kept_totals};
      const Task moved{0, zone, t.end, t.depth + 1, moved_tag, moved_totals};
      Task l = zero_left ? kept : moved, r = zero_left ? moved : kept;
      l.node = static_cast<std::size_t>(left);
      r.node = static_cast<std::size_t>(left + 1);
      stack.push_back(r);
      stack.push_back(l);
    }
    return tree;
  }

 private:
  struct Split {
    std::uint32_t feature = 0;
    double threshold = 0.0;
  };
  struct Entry {
    std::uint32_t slot;
    double value;
    std::uint8_t label;
    double weight;
  };

  // Draws features in random order through the column index, keeping those
  // that vary within the node. Gives up once the columns read exceed the
  // budget, where a row scan is cheaper.
  bool sample_by_column(std::uint64_t tag, double size, double budget, Rng& rng) {
    double cost = 0;
    for (std::size_t i = 0; i < dim_ && candidates_.size() < mtry_; ++i) {
      std::swap(perm_[i], perm_[i + uniform_index(rng, dim_ - i)]);
      const auto f = perm_[i];
      const std::size_t b = rows_.col_ptr[f], e = rows_.col_ptr[f + 1];
      cost += static_cast<double>(e - b + 1);
      if (cost > budget) return false;
      const std::size_t mark = entries_.size();
      double count = 0;
      double lo = 0.0, hi = 0.0;
      for (std::size_t k = b; k < e; ++k) {
        const auto r = rows_.col_row[k];
        if (tag_[r] != tag) continue;
        const double v = rows_.col_val[k];
        if (count == 0) lo = hi = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        count += weight_[r];
        entries_.push_back({static_cast<std::uint32_t>(candidates_.size()), v, rows_.label[r],
                            static_cast<double>(weight_[r])});
      }
      if (count > 0 && (count < size || lo != hi)) candidates_.push_back(f);
      else entries_.resize(mark);
    }
    return true;
  }

  // Picks up to mtry features uniformly among those that vary within the
  // node, then the Gini-optimal threshold among them.
  bool find_split(std::size_t begin, std::size_t end, std::uint64_t tag, const std::array<double, kNumClasses>& totals,
                  Rng& rng, Split& out) {
    const double size = totals[0] + totals[1];
    entries_.clear();
    candidates_.clear();
    if (!sample_by_column(tag, size, 2.0 * avg_nnz_ * static_cast<double>(end - begin), rng)) {
      entries_.clear();
      candidates_.clear();
      sample_by_row(begin, end, size, rng);
    }
    if (candidates_.empty()) return false;
    return best_split(totals, out);
  }

  void sample_by_row(std::size_t begin, std::size_t end, double size, Rng& rng) {
    ++epoch_;
    touched_.clear();
    for (std::size_t i = begin; i < end; ++i) {
      const auto s = order_[i];
      for (std::size_t k = rows_.row_ptr[s]; k < rows_.row_ptr[s + 1]; ++k) {
        const auto f = rows_.col[k];
        const double v = rows_.val[k];
        if (stamp_[f] != epoch_) {
          stamp_[f] = epoch_;
          count_[f] = 0;
          vmin_[f] = vmax_[f] = v;
          touched_.push_back(f);
        }
        count_[f] += weight_[s];
        vmin_[f] = std::min(vmin_[f], v);
        vmax_[f] = std::max(vmax_[f], v);
      }
    }
    for (auto f : touched_)
      if (count_[f] < size || vmin_[f] != vmax_[f]) candidates_.push_back(f);

    const std::size_t m = std::min(mtry_, candidates_.size());
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + uniform_index(rng, candidates_.size() - i);
      std::swap(candidates_[i], candidates_[j]);
      slot_stamp_[candidates_[i]] = epoch_;
      slot_[candidates_[i]] = static_cast<std::uint32_t>(i);
    }

    for (std::size_t i = begin; i < end; ++i) {
      const auto s = order_[i];
      for (std::size_t k = rows_.row_ptr[s]; k < rows_.row_ptr[s + 1]; ++k) {
        const auto f = rows_.col[k];
        if (slot_stamp_[f] == epoch_)
          entries_.push_back({slot_[f], rows_.val[k], rows_.label[s], static_cast<double>(weight_[s])});
      }
    }
    candidates_.resize(m);
  }

  bool best_split(const std::array<double, kNumClasses>& totals, Split& out) {
    // Bucket by slot, then order each bucket by value.
    bucket_.assign(candidates_.size() + 1, 0);
    for (const auto& en : entries_) ++bucket_[en.slot + 1];
    for (std::size_t b = 1; b < bucket_.size(); ++b) bucket_[b] += bucket_[b - 1];
    sorted_.resize(entries_.size());
    for (const auto& en : entries_) sorted_[bucket_[en.slot]++] = en;
    entries_.swap(sorted_);
    auto by_value = [](const Entry& a, const Entry& b) { return a.value < b.value; };
    for (std::size_t b = 0, start = 0; b < candidates_.size(); ++b) {
      const auto first = entries_.begin() + static_cast<std::ptrdiff_t>(start);
      const auto last = entries_.begin() + static_cast<std::ptrdiff_t>(bucket_[b]);
      if (!std::is_sorted(first, last, by_value)) std::sort(first, last, by_value);
      start = bucket_[b];
    }

    const auto min_leaf = static_cast<double>(std::max(1, params_.min_samples_leaf));
    const double n0 = totals[0], n1 = totals[1], n = n0 + n1;
    // Maximizing sum over children of (c0^2 + c1^2) / size minimizes weighted Gini.
    auto score = [&](double l0, double l1) {
      const double nl = l0 + l1, r0 = n0 - l0, r1 = n1 - l1, nr = n - nl;
      return (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr;
    };
    bool found = false;
    double best = -1.0;
    std::size_t e = 0;
    while (e < entries_.size()) {
      const auto slot = entries_[e].slot;
      std::size_t g_end = e;
      std::array<double, kNumClasses> nz{};
      while (g_end < entries_.size() && entries_[g_end].slot == slot) {
        nz[entries_[g_end].label] += entries_[g_end].weight;
        ++g_end;
      }
      // Samples without an entry for this feature have value 0; that group is
      // merged into the sorted scan where 0 falls among the stored values.
      const double z0 = n0 - nz[0], z1 = n1 - nz[1];
      bool zeros_pending = z0 + z1 > 0;
      double l0 = 0.0, l1 = 0.0, prev = 0.0;
      bool have_prev = false;
      auto consider = [&](double next) {
        const double left_size = l0 + l1;
        if (!have_prev || left_size < min_leaf || n - left_size < min_leaf) return;
        const double sc = score(l0, l1);
        if (sc > best) {
          best = sc;
          found = true;
          out.feature = candidates_[slot];
          out.threshold = 0.5 * (prev + next);
        }
      };
      auto add_zeros = [&] {
        consider(0.0);
        l0 += z0;
        l1 += z1;
        prev = 0.0;
        have_prev = true;
        zeros_pending = false;
      };
      for (std::size_t k = e; k < g_end;) {
        const double v = entries_[k].value;
        if (zeros_pending && v > 0.0) add_zeros();
        consider(v);
        while (k < g_end && entries_[k].value == v) {
          (entries_[k].label ? l1 : l0) += entries_[k].weight;
          ++k;
        }
        if (v == 0.0 && zeros_pending) {
          l0 += z0;
          l1 += z1;
          zeros_pending = false;
        }
        prev = v;
        have_prev = true;
      }
      if (zeros_pending) add_zeros();
      e = g_end;
    }
    return found;
  }

  const CsrRows& rows_;
  const ForestParams& params_;
  std::size_t mtry_;
  std::size_t dim_;
  double avg_nnz_ = 0.0;
  std::uint64_t epoch_ = 0;
  std::vector<std::uint64_t> stamp_;
  std::vector<double> count_;
  std::vector<double> vmin_, vmax_;
  std::vector<std::uint64_t> slot_stamp_;
  std::vector<std::uint32_t> slot_;
  std::vector<std::uint32_t> perm_;
  std::vector<std::uint32_t> order_, pos_, weight_, moved_;
  std::uint64_t next_tag_ = 0;
  std::vector<std::uint64_t> tag_;
  std::vector<std::uint32_t> touched_, candidates_;
  std::vector<Entry> entries_, sorted_;
  std::vector<std::size_t> bucket_;
};

}  // namespace detail

// Tree t draws from an RNG stream derived from (seed, t).
inline ForestModel fit_forest(const Examples& data, const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees < 1) throw Error("random forest needs at least one tree");
  const detail::CsrRows rows(data);
  const std::size_t mtry = params.max_features > 0
                               ? static_cast<std::size_t>(params.max_features)
                               : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.dim))));
  detail::TreeBuilder builder(rows, data.dim, params, std::max<std::size_t>(1, mtry));
  ForestModel m;
  m.trees.reserve(static_cast<std::size_t>(params.n_trees));
  const auto n = static_cast<std::uint32_t>(data.size());
  std::vector<std::uint32_t> weights(n);
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    if (params.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0);
      for (std::uint32_t i = 0; i < n; ++i) ++weights[uniform_index(rng, n)];
    } else {
      std::fill(weights.begin(), weights.end(), 1);
    }
    m.trees.push_back(builder.build(weights, rng));
  }
  return m;
}

}  // namespace alcrowd::learners
