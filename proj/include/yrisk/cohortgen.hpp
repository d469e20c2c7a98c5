#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "yrisk/activations.hpp"
#include "yrisk/error.hpp"
#include "yrisk/survey.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

// A question whose answer shifts the depression probability: answering 1
// adds logit(cond_rate) - logit(base_rate) to the label's log-odds.
struct PlantedEffect {
  int question = 0;  // 1-based question number
  double response1_prob = 0.5;
  double cond_rate = 0.5;  // P(depressed | response 1), other effects aside
};

struct CohortSpec {
  int n_rows = 0;
  int n_questions = 99;
  double base_rate = 0.40;
  std::vector<PlantedEffect> planted;
  std::vector<std::pair<char, double>> race_mix;  // empty = uniform A..E
  std::uint64_t seed = 0;
};

struct GroundTruth {
  std::vector<std::string> planted_ids;
  std::vector<double> cond_rates;
  std::vector<double> log_odds_delta;
  double bayes_f1 = 0.0;
};

namespace detail {

inline constexpr int kLabelQ = 25;
inline constexpr int kRaceQ = 5;
inline constexpr int kEthnicityQ = 4;

// clamped so deterministic effects (rates of exactly 0 or 1) stay finite
inline double logit(double p) {
  const double eps = 1e-12;
  double c = std::min(std::max(p, eps), 1.0 - eps);
  return std::log(c / (1.0 - c));
}

inline void validate_spec(const CohortSpec& spec) {
  if (spec.n_rows < 1) throw DomainError("cohort spec: n_rows must be >= 1");
  if (spec.n_questions < 25) throw DomainError("cohort spec: need at least 25 questions");
  if (!(spec.base_rate >= 0.0 && spec.base_rate <= 1.0)) throw DomainError("cohort spec: base_rate outside [0,1]");
  std::vector<int> seen;
  for (const auto& p : spec.planted) {
    if (p.question < 1 || p.question > spec.n_questions) throw DomainError("cohort spec: planted question out of range");
    if (p.question == kLabelQ || p.question == kRaceQ || p.question == kEthnicityQ)
      throw DomainError("cohort spec: planted question collides with label/race/ethnicity column");
    if (!(p.response1_prob >= 0.0 && p.response1_prob <= 1.0) || !(p.cond_rate >= 0.0 && p.cond_rate <= 1.0))
      throw DomainError("cohort spec: planted probabilities outside [0,1]");
    seen.push_back(p.question);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw DomainError("cohort spec: duplicate planted question");
  double mix_total = 0.0;
  for (const auto& [letter, prob] : spec.race_mix) {
    if (letter < 'A' || letter > 'Z') throw DomainError("cohort spec: race letter outside A..Z");
    if (prob < 0.0) throw DomainError("cohort spec: negative race probability");
    mix_total += prob;
  }
  if (!spec.race_mix.empty() && mix_total <= 0.0) throw DomainError("cohort spec: race mix sums to zero");
}

inline std::vector<std::pair<char, double>> effective_race_mix(const CohortSpec& spec) {
  std::vector<std::pair<char, double>> mix = spec.race_mix;
  if (mix.empty()) mix = {{'A', 0.2}, {'B', 0.2}, {'C', 0.2}, {'D', 0.2}, {'E', 0.2}};
  double total = 0.0;
  for (const auto& [letter, prob] : mix) total += prob;
  for (auto& [letter, prob] : mix) prob /= total;
  return mix;
}

}  // namespace detail

// Optimal F1 under the generative model: enumerate planted response
// patterns, order them by conditional depression probability and sweep the
// prefix decision rules; no rule outside that family can do better.
inline double bayes_f1(const CohortSpec& spec) {
  detail::validate_spec(spec);
  if (spec.planted.size() > 20) throw DomainError("bayes_f1: more than 20 planted features");

  auto planted = spec.planted;
  std::sort(planted.begin(), planted.end(),
            [](const PlantedEffect& a, const PlantedEffect& b) { return a.question < b.question; });

  const double base_logit = detail::logit(spec.base_rate);
  const std::size_t m = planted.size();
  const std::size_t count = std::size_t{1} << m;
  std::vector<std::pair<double, double>> patterns(count);  // (q_s, prob_s)
  for (std::size_t s = 0; s < count; ++s) {
    double prob = 1.0;
    double z = base_logit;
    for (std::size_t j = 0; j < m; ++j) {
      bool response1 = (s >> j) & 1u;
      prob *= response1 ? planted[j].response1_prob : 1.0 - planted[j].response1_prob;
      if (response1) z += detail::logit(planted[j].cond_rate) - base_logit;
    }
    patterns[s] = {sigmoid(z), prob};
  }
  std::sort(patterns.begin(), patterns.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  double total_positive = 0.0;
  for (const auto& [q, prob] : patterns) total_positive += prob * q;
  if (total_positive <= 0.0) return 0.0;

  double best = 0.0;
  double tp = 0.0, mass = 0.0;
  for (const auto& [q, prob] : patterns) {
    tp += prob * q;
    mass += prob;
    double f1 = 2.0 * tp / (mass + total_positive);
    best = std::max(best, f1);
  }
  return best;
}

// Draws a synthetic coded-survey table. Non-planted questions are uniform
// over {1,2} and independent of the label; the label's log-odds is the base
// rate shifted by each planted response-1. Same seed, same bytes.
inline std::pair<SurveyTable, GroundTruth> generate(const CohortSpec& spec) {
  detail::validate_spec(spec);

  auto planted = spec.planted;
  std::sort(planted.begin(), planted.end(),
            [](const PlantedEffect& a, const PlantedEffect& b) { return a.question < b.question; });
  std::unordered_map<int, const PlantedEffect*> by_question;
  for (const auto& p : planted) by_question[p.question] = &p;

  const double base_logit = detail::logit(spec.base_rate);
  auto mix = detail::effective_race_mix(spec);

  std::vector<std::string> columns;
  for (int q = 1; q <= spec.n_questions; ++q) columns.push_back("q" + std::to_string(q));

  Rng rng(mix_seed(spec.seed, "cohortgen"));
  std::vector<RespondentRecord> rows;
  rows.reserve(static_cast<std::size_t>(spec.n_rows));
  for (int i = 0; i < spec.n_rows; ++i) {
    RespondentRecord rec;
    rec.cells.resize(columns.size());
    double label_logit = base_logit;
    for (int q = 1; q <= spec.n_questions; ++q) {
      std::size_t col = static_cast<std::size_t>(q - 1);
      if (q == detail::kLabelQ) continue;  // drawn after its inputs
      if (q == detail::kRaceQ) {
        double u = rng.next_double();
        char letter = mix.back().first;
        for (const auto& [cand, prob] : mix) {
          if (u < prob) {
            letter = cand;
            break;
          }
          u -= prob;
        }
        rec.cells[col] = Cell::race(std::string(1, letter));
        continue;
      }
      if (auto it = by_question.find(q); it != by_question.end()) {
        bool response1 = rng.next_double() < it->second->response1_prob;
        rec.cells[col] = Cell::num(response1 ? 1.0 : 2.0);
        if (response1) label_logit += detail::logit(it->second->cond_rate) - base_logit;
        continue;
      }
      rec.cells[col] = Cell::num(rng.next_double() < 0.5 ? 1.0 : 2.0);
    }
    bool depressed = rng.next_double() < sigmoid(label_logit);
    rec.cells[static_cast<std::size_t>(detail::kLabelQ - 1)] = Cell::num(depressed ? 1.0 : 2.0);
    rows.push_back(std::move(rec));
  }

  GroundTruth truth;
  for (const auto& p : planted) {
    truth.planted_ids.push_back("q" + std::to_string(p.question));
    truth.cond_rates.push_back(p.cond_rate);
    truth.log_odds_delta.push_back(detail::logit(p.cond_rate) - base_logit);
  }
  truth.bayes_f1 = bayes_f1(spec);
  return {SurveyTable(std::move(columns), std::move(rows)), std::move(truth)};
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& t) {
  return {{"version", 1},
          {"planted", t.planted_ids},
          {"cond_rates", t.cond_rates},
          {"log_odds_delta", t.log_odds_delta},
          {"bayes_f1", t.bayes_f1}};
}

}  // namespace yrisk
