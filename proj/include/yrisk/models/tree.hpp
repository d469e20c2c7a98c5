#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "yrisk/error.hpp"
#include "yrisk/models/types.hpp"
#include "yrisk/survey.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

// Binary Gini impurity, in [0, 0.5].
inline double gini_impurity(long long c0, long long c1) {
  if (c0 < 0 || c1 < 0 || (c0 == 0 && c1 == 0)) throw DomainError("gini_impurity: empty class counts");
  double n = static_cast<double>(c0 + c1);
  double f0 = static_cast<double>(c0) / n;
  double f1 = static_cast<double>(c1) / n;
  return 1.0 - (f0 * f0 + f1 * f1);
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

namespace detail {

// Split quality is compared with exact integer arithmetic. For binary class
// counts the Gini gain ordering reduces to comparing
//   S = (l0^2 + l1^2)/nl + (r0^2 + r1^2)/nr
// as fractions; exactness keeps the (feature, threshold) tie-break stable
// no matter how the candidates are enumerated.
struct SplitScore {
  long long numerator = 0;  // (l0^2+l1^2)*nr + (r0^2+r1^2)*nl
  long long denominator = 1;  // nl * nr

  bool better_than(const SplitScore& o) const {
    return static_cast<__int128>(numerator) * o.denominator > static_cast<__int128>(o.numerator) * denominator;
  }
};

inline SplitScore split_score(long long l0, long long l1, long long r0, long long r1) {
  long long nl = l0 + l1;
  long long nr = r0 + r1;
  return {(l0 * l0 + l1 * l1) * nr + (r0 * r0 + r1 * r1) * nl, nl * nr};
}

// Midpoint between consecutive distinct sorted values; guarded so each side
// of the split stays non-empty even for adjacent doubles.
inline double midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(lo <= mid && mid < hi)) mid = lo;
  return mid;
}

}  // namespace detail

// Exhaustive search over all (feature, midpoint) candidates; picks maximal
// Gini gain, ties broken by lower feature index then lower threshold.
// Pure nodes and nodes with no distinct values return nullopt. Impure nodes
// split even at zero gain (the XOR pattern needs the zero-gain first cut).
inline std::optional<SplitChoice> best_split(const LabeledMatrix& data, std::span<const int> rows,
                                             std::span<const int> features) {
  const std::size_t n = rows.size();
  if (n < 2) return std::nullopt;

  long long c0 = 0, c1 = 0;
  for (int r : rows) (data.y[static_cast<std::size_t>(r)] ? c1 : c0) += 1;
  if (c0 == 0 || c1 == 0) return std::nullopt;

  bool found = false;
  detail::SplitScore best_score;
  SplitChoice best;

  std::vector<std::pair<double, int>> order(n);
  for (int f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = static_cast<std::size_t>(rows[i]);
      order[i] = {data.at(r, static_cast<std::size_t>(f)), data.y[r]};
    }
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    long long l0 = 0, l1 = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      (order[i].second ? l1 : l0) += 1;
      if (order[i].first == order[i + 1].first) continue;
      detail::SplitScore score = detail::split_score(l0, l1, c0 - l0, c1 - l1);
      if (!found || score.better_than(best_score)) {
        found = true;
        best_score = score;
        best.feature = f;
        best.threshold = detail::midpoint(order[i].first, order[i + 1].first);
        double weighted = (static_cast<double>(l0 + l1) * gini_impurity(l0, l1) +
                           static_cast<double>(c0 - l0 + c1 - l1) * gini_impurity(c0 - l0, c1 - l1)) /
                          static_cast<double>(n);
        best.gain = gini_impurity(c0, c1) - weighted;
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

namespace detail {

struct TreeBuilder {
  const LabeledMatrix& data;
  int max_depth;
  int min_split;
  int feature_subsample;  // <= 0 or >= d means all features
  Rng* rng;               // only consulted when subsampling
  TreeParams out;

  std::vector<int> candidates() {
    int d = static_cast<int>(data.d);
    std::vector<int> all(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) all[static_cast<std::size_t>(i)] = i;
    if (feature_subsample <= 0 || feature_subsample >= d || rng == nullptr) return all;
    // sample without replacement, then sort so the tie-break stays by index
    std::vector<int> picked;
    for (int i = 0; i < feature_subsample; ++i) {
      std::size_t j = rng->next_below(all.size());
      picked.push_back(all[j]);
      all.erase(all.begin() + static_cast<std::ptrdiff_t>(j));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  int build(std::vector<int>& rows, int depth) {
    long long c0 = 0, c1 = 0;
    for (int r : rows) (data.y[static_cast<std::size_t>(r)] ? c1 : c0) += 1;
    int majority = c1 > c0 ? 1 : 0;

    int node_id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(TreeNode{});
    TreeNode& node = out.nodes.back();
    node.label = majority;

    if (depth >= max_depth || static_cast<int>(rows.size()) < min_split || c0 == 0 || c1 == 0)
      return node_id;

    std::vector<int> feats = candidates();
    auto split = best_split(data, rows, feats);
    if (!split) return node_id;

    std::vector<int> left, right;
    for (int r : rows) {
      if (data.at(static_cast<std::size_t>(r), static_cast<std::size_t>(split->feature)) <= split->threshold)
        left.push_back(r);
      else
        right.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    int left_id = build(left, depth + 1);
    int right_id = build(right, depth + 1);
    TreeNode& filled = out.nodes[static_cast<std::size_t>(node_id)];
    filled.feature = split->feature;
    filled.threshold = split->threshold;
    filled.left = left_id;
    filled.right = right_id;
    filled.label = -1;
    return node_id;
  }
};

}  // namespace detail

inline TreeParams train_tree(const LabeledMatrix& data, std::vector<int> rows, int max_depth, int min_split,
                             int feature_subsample = 0, Rng* rng = nullptr) {
  if (rows.empty()) throw DomainError("train_tree: no rows");
  detail::TreeBuilder builder{data, max_depth, min_split, feature_subsample, rng, {}};
  builder.build(rows, 0);
  return std::move(builder.out);
}

inline int tree_predict_row(const TreeParams& tree, std::span<const double> row) {
  int node = 0;
  while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].label;
}

}  // namespace yrisk
