#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "yrisk/activations.hpp"
#include "yrisk/error.hpp"
#include "yrisk/eval.hpp"
#include "yrisk/models.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

// Sweep over (hidden units x activation x epochs). The default ranges mirror
// the wide pass (1-40 neurons, all nine activations, 5-20 epochs); the
// economical preset narrows neurons to 1-8.
struct GridSpec {
  int hidden_lo = 1;
  int hidden_hi = 40;
  std::vector<std::string> activations;  // empty = all nine
  int epochs_lo = 5;
  int epochs_hi = 20;
  SplitPlan plan = SplitPlan::holdout();
  std::uint64_t seed = 0;
  MlpConfig base;  // input_dim, batch size, adam hypers shared by every cell

  static GridSpec economical() {
    GridSpec g;
    g.hidden_hi = 8;
    return g;
  }
};

struct GridEntry {
  MlpConfig config;
  double mean_f1 = 0.0;
  bool ok = true;
  std::string error;
  int rank = 0;
};

struct Leaderboard {
  std::vector<GridEntry> entries;  // sorted best-first; failed cells last

  const GridEntry& best() const {
    if (entries.empty()) throw DomainError("leaderboard is empty");
    return entries.front();
  }
};

namespace detail {

// normalize to canonical activation order, deduplicated
inline std::vector<std::string> normalize_activations(const std::vector<std::string>& names) {
  const auto& all = activation_set();
  if (names.empty()) {
    std::vector<std::string> out;
    for (const auto& a : all) out.push_back(a.name);
    return out;
  }
  std::vector<bool> wanted(all.size(), false);
  for (const auto& n : names) {
    bool known = false;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all[i].name == n) {
        wanted[i] = true;
        known = true;
        break;
      }
    }
    if (!known) throw DomainError("unknown activation: " + n);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (wanted[i]) out.push_back(all[i].name);
  return out;
}

inline void validate_grid(const GridSpec& g) {
  if (g.hidden_lo < 1 || g.hidden_hi < g.hidden_lo) throw DomainError("grid: bad hidden-unit range");
  if (g.epochs_lo < 1 || g.epochs_hi < g.epochs_lo) throw DomainError("grid: bad epoch range");
}

inline bool entry_order(const GridEntry& a, const GridEntry& b) {
  if (a.ok != b.ok) return a.ok;
  if (a.ok && a.mean_f1 != b.mean_f1) return a.mean_f1 > b.mean_f1;
  if (a.config.hidden_units != b.config.hidden_units) return a.config.hidden_units < b.config.hidden_units;
  if (a.config.epochs != b.config.epochs) return a.config.epochs < b.config.epochs;
  return a.config.activation < b.config.activation;
}

}  // namespace detail

// Cell evaluator: mean F1 for one configuration under a derived seed.
using CellEvalFn = std::function<double(const MlpConfig&, std::uint64_t)>;

// Evaluates every cell, never just the winner. A failing cell is recorded
// with its error and ranked behind all successful ones.
inline Leaderboard grid_search_with(const GridSpec& grid, const CellEvalFn& evaluate_cell) {
  detail::validate_grid(grid);
  std::vector<std::string> acts = detail::normalize_activations(grid.activations);

  Leaderboard board;
  std::uint64_t cell_index = 0;
  for (int hidden = grid.hidden_lo; hidden <= grid.hidden_hi; ++hidden) {
    for (const auto& act : acts) {
      for (int epochs = grid.epochs_lo; epochs <= grid.epochs_hi; ++epochs, ++cell_index) {
        GridEntry entry;
        entry.config = grid.base;
        entry.config.hidden_units = hidden;
        entry.config.activation = act;
        entry.config.epochs = epochs;
        try {
          entry.mean_f1 = evaluate_cell(entry.config, mix_seed(grid.seed, cell_index));
        } catch (const Error& e) {
          entry.ok = false;
          entry.mean_f1 = -std::numeric_limits<double>::infinity();
          entry.error = e.what();
        }
        board.entries.push_back(std::move(entry));
      }
    }
  }
  std::sort(board.entries.begin(), board.entries.end(), detail::entry_order);
  for (std::size_t i = 0; i < board.entries.size(); ++i) board.entries[i].rank = static_cast<int>(i + 1);
  return board;
}

inline Leaderboard grid_search(const LabeledMatrix& data, const GridSpec& grid) {
  return grid_search_with(grid, [&](const MlpConfig& mlp, std::uint64_t cell_seed) {
    TrainConfig cfg = default_config(ModelKind::Mlp);
    cfg.seed = cell_seed;
    cfg.mlp = mlp;
    return evaluate(cfg, data, grid.plan).mean_f1;
  });
}

inline std::string leaderboard_to_csv(const Leaderboard& board) {
  std::string out = "hidden_units,activation,epochs,mean_f1,rank\n";
  for (const auto& e : board.entries) {
    out += std::to_string(e.config.hidden_units);
    out += ',';
    out += e.config.activation;
    out += ',';
    out += std::to_string(e.config.epochs);
    out += ',';
    out += e.ok ? fmt_double(e.mean_f1) : "nan";
    out += ',';
    out += std::to_string(e.rank);
    out += '\n';
  }
  return out;
}

// Best-config document for feeding back into the run command.
inline nlohmann::json best_config_to_json(const Leaderboard& board) {
  const GridEntry& best = board.best();
  return {{"version", kReportSchemaVersion},
          {"mean_f1", best.mean_f1},
          {"mlp", mlp_config_to_json(best.config)}};
}

}  // namespace yrisk
