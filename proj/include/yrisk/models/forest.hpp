#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "yrisk/models/tree.hpp"
#include "yrisk/models/types.hpp"
#include "yrisk/survey.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

// Bagged CART ensemble. Every tree derives its own seed from
// (train_seed, tree index), so tree training order cannot change results.
inline ForestParams train_forest(const TrainConfig& cfg, const LabeledMatrix& data) {
  int d = static_cast<int>(data.d);
  int subsample = cfg.feature_subsample > 0
                      ? cfg.feature_subsample
                      : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  if (subsample > d) subsample = d;

  ForestParams forest;
  forest.trees.reserve(static_cast<std::size_t>(cfg.n_trees));
  for (int t = 0; t < cfg.n_trees; ++t) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> rows(data.n);
    if (cfg.bootstrap) {
      for (std::size_t i = 0; i < data.n; ++i) rows[i] = static_cast<int>(rng.next_below(data.n));
    } else {
      for (std::size_t i = 0; i < data.n; ++i) rows[i] = static_cast<int>(i);
    }
    forest.trees.push_back(train_tree(data, std::move(rows), cfg.max_depth, cfg.min_split, subsample, &rng));
  }
  return forest;
}

// Fraction of trees voting depressed.
inline double forest_vote_fraction(const ForestParams& forest, std::span<const double> row) {
  std::size_t votes = 0;
  for (const auto& tree : forest.trees) votes += static_cast<std::size_t>(tree_predict_row(tree, row));
  return static_cast<double>(votes) / static_cast<double>(forest.trees.size());
}

}  // namespace yrisk
