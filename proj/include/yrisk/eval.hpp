#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "yrisk/error.hpp"
#include "yrisk/models.hpp"
#include "yrisk/survey.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

inline constexpr int kReportSchemaVersion = 1;

struct SplitPlan {
  enum class Kind : std::uint8_t { Holdout, KFold };

  Kind kind = Kind::Holdout;
  double test_fraction = 0.25;
  int k = 10;
  bool stratified = true;
  std::uint64_t seed = 0;

  static SplitPlan holdout(double fraction = 0.25, bool stratified = true, std::uint64_t seed = 0) {
    return {Kind::Holdout, fraction, 10, stratified, seed};
  }
  static SplitPlan kfold(int k = 10, bool stratified = true, std::uint64_t seed = 0) {
    return {Kind::KFold, 0.25, k, stratified, seed};
  }

  std::string name() const { return kind == Kind::Holdout ? "holdout" : "cv"; }
};

inline SplitPlan parse_plan(std::string_view text) {
  auto colon = text.find(':');
  std::string_view head = text.substr(0, colon);
  std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "holdout") {
    SplitPlan p = SplitPlan::holdout();
    if (!arg.empty()) p.test_fraction = std::stod(std::string(arg));
    return p;
  }
  if (head == "cv" || head == "kfold") {
    SplitPlan p = SplitPlan::kfold();
    if (!arg.empty()) p.k = std::stoi(std::string(arg));
    return p;
  }
  throw DomainError("unknown split plan: " + std::string(text));
}

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;

  long long total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct MetricsReport {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

inline ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw DomainError("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw DomainError("confusion: labels must be 0 or 1");
    if (t == 1 && p == 1)
      ++c.tp;
    else if (t == 0 && p == 1)
      ++c.fp;
    else if (t == 1 && p == 0)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

// Precision/recall/accuracy are single divisions of exact integer counts,
// and F1 uses the equivalent closed form 2tp / (2tp + fp + fn), so every
// value is the correctly rounded rational. Zero denominators yield 0.
inline MetricsReport prf1(const ConfusionCounts& c) {
  if (c.total() <= 0) throw DomainError("prf1: no evaluated rows");
  MetricsReport m;
  m.counts = c;
  m.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  long long f1_den = 2 * c.tp + c.fp + c.fn;
  m.f1 = f1_den > 0 ? static_cast<double>(2 * c.tp) / static_cast<double>(f1_den) : 0.0;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return m;
}

namespace detail {

inline std::vector<std::vector<int>> indices_by_class(std::span<const int> y) {
  std::vector<std::vector<int>> by_class(2);
  for (std::size_t i = 0; i < y.size(); ++i)
    by_class[static_cast<std::size_t>(y[i] != 0)].push_back(static_cast<int>(i));
  return by_class;
}

}  // namespace detail

// 75/25-style holdout. Stratified mode keeps each class within one row of
// its proportional share via largest-remainder apportionment.
inline std::pair<std::vector<int>, std::vector<int>> split_holdout(std::size_t n, const SplitPlan& plan,
                                                                   std::span<const int> y) {
  if (plan.kind != SplitPlan::Kind::Holdout) throw DomainError("split_holdout: wrong plan kind");
  if (!(plan.test_fraction > 0.0 && plan.test_fraction < 1.0))
    throw DomainError("split_holdout: test_fraction outside (0,1)");
  if (n < 4) throw DomainError("split_holdout: need at least 4 rows");
  if (y.size() != n) throw DomainError("split_holdout: label length mismatch");

  std::size_t test_n = static_cast<std::size_t>(std::llround(static_cast<double>(n) * plan.test_fraction));
  test_n = std::clamp<std::size_t>(test_n, 1, n - 1);

  Rng rng(mix_seed(plan.seed, "holdout"));
  std::vector<int> test;
  if (plan.stratified) {
    auto by_class = detail::indices_by_class(y);
    if (by_class[0].empty() || by_class[1].empty())
      throw DataError("split_holdout: stratified split needs both classes");
    // floor shares first, then hand out the remainder by largest fraction
    std::vector<std::size_t> take(2);
    std::vector<double> frac(2);
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
      double exact = static_cast<double>(by_class[static_cast<std::size_t>(c)].size()) * plan.test_fraction;
      take[static_cast<std::size_t>(c)] = static_cast<std::size_t>(std::floor(exact));
      frac[static_cast<std::size_t>(c)] = exact - std::floor(exact);
      assigned += take[static_cast<std::size_t>(c)];
    }
    for (std::size_t r = assigned; r < test_n; ++r) {
      int pick = frac[1] > frac[0] ? 1 : (frac[0] > frac[1] ? 0 : (by_class[1].size() > by_class[0].size() ? 1 : 0));
      take[static_cast<std::size_t>(pick)] += 1;
      frac[static_cast<std::size_t>(pick)] = -1.0;
    }
    for (int c = 0; c < 2; ++c) {
      auto& members = by_class[static_cast<std::size_t>(c)];
      std::size_t want = std::min(take[static_cast<std::size_t>(c)], members.size());
      rng.shuffle(members);
      test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(want));
    }
  } else {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    rng.shuffle(all);
    test.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(test_n));
  }

  std::sort(test.begin(), test.end());
  std::vector<int> train;
  train.reserve(n - test.size());
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (t < test.size() && test[t] == static_cast<int>(i))
      ++t;
    else
      train.push_back(static_cast<int>(i));
  }
  return {std::move(train), std::move(test)};
}

// k disjoint test folds covering every row, fold sizes within one row of
// each other. Stratified mode deals each class round-robin so per-fold class
// counts stay within one of proportional.
inline std::vector<std::pair<std::vector<int>, std::vector<int>>> split_kfold(std::size_t n,
                                                                              const SplitPlan& plan,
                                                                              std::span<const int> y) {
  if (plan.kind != SplitPlan::Kind::KFold) throw DomainError("split_kfold: wrong plan kind");
  if (plan.k < 2) throw DomainError("split_kfold: k must be >= 2");
  if (static_cast<std::size_t>(plan.k) > n) throw DomainError("split_kfold: k exceeds row count");
  if (y.size() != n) throw DomainError("split_kfold: label length mismatch");

  Rng rng(mix_seed(plan.seed, "kfold"));
  std::vector<int> dealt;
  dealt.reserve(n);
  if (plan.stratified) {
    auto by_class = detail::indices_by_class(y);
    for (auto& members : by_class) {
      rng.shuffle(members);
      dealt.insert(dealt.end(), members.begin(), members.end());
    }
  } else {
    dealt.resize(n);
    std::iota(dealt.begin(), dealt.end(), 0);
    rng.shuffle(dealt);
  }

  std::size_t k = static_cast<std::size_t>(plan.k);
  std::vector<std::vector<int>> tests(k);
  for (std::size_t j = 0; j < n; ++j) tests[j % k].push_back(dealt[j]);

  std::vector<std::pair<std::vector<int>, std::vector<int>>> folds;
  folds.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<int> test = tests[f];
    std::sort(test.begin(), test.end());
    std::vector<int> train;
    train.reserve(n - test.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (t < test.size() && test[t] == static_cast<int>(i))
        ++t;
      else
        train.push_back(static_cast<int>(i));
    }
    folds.emplace_back(std::move(train), std::move(test));
  }
  return folds;
}

struct EvalSummary {
  std::string model;
  std::string cohort;
  std::string plan;
  std::uint64_t seed = 0;
  std::vector<MetricsReport> per_fold;
  double mean_f1 = 0.0;
  MetricsReport pooled;  // fold confusion counts summed, then scored
};

// A trainer maps a training matrix (plus a fold seed) to a predictor.
using PredictFn = std::function<std::vector<int>(const LabeledMatrix&)>;
using TrainerFn = std::function<PredictFn(const LabeledMatrix&, std::uint64_t)>;

inline EvalSummary evaluate_with(const TrainerFn& trainer, const LabeledMatrix& data, const SplitPlan& plan,
                                 std::string model_name, std::uint64_t model_seed = 0) {
  if (!detail::has_both_classes(data)) throw DataError("evaluate: data holds a single class");

  std::vector<std::pair<std::vector<int>, std::vector<int>>> folds;
  if (plan.kind == SplitPlan::Kind::Holdout) {
    folds.push_back(split_holdout(data.n, plan, data.y));
  } else {
    folds = split_kfold(data.n, plan, data.y);
  }

  EvalSummary summary;
  summary.model = std::move(model_name);
  summary.plan = plan.name();
  summary.seed = model_seed;
  ConfusionCounts pooled;
  double f1_sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    LabeledMatrix train = data.subset(folds[f].first);
    LabeledMatrix test = data.subset(folds[f].second);
    if (!detail::has_both_classes(train))
      throw DataError("evaluate: fold " + std::to_string(f) +
                      " training split holds a single class; enable stratified splitting");
    PredictFn predictor = trainer(train, mix_seed(model_seed, static_cast<std::uint64_t>(f)));
    std::vector<int> y_pred = predictor(test);
    MetricsReport report = prf1(confusion(test.y, y_pred));
    f1_sum += report.f1;
    pooled.tp += report.counts.tp;
    pooled.fp += report.counts.fp;
    pooled.fn += report.counts.fn;
    pooled.tn += report.counts.tn;
    summary.per_fold.push_back(report);
  }
  summary.mean_f1 = f1_sum / static_cast<double>(summary.per_fold.size());
  summary.pooled = prf1(pooled);
  return summary;
}

inline EvalSummary evaluate(const TrainConfig& cfg, const LabeledMatrix& data, const SplitPlan& plan) {
  TrainerFn trainer = [&cfg](const LabeledMatrix& train, std::uint64_t fold_seed) -> PredictFn {
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed;
    FittedModel model = fit(fold_cfg, train);
    return [model](const LabeledMatrix& test) { return predict(model, test); };
  };
  return evaluate_with(trainer, data, plan, std::string(model_kind_name(cfg.kind)), cfg.seed);
}

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population form
};

inline Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw DomainError("aggregate: empty input");
  double sum = 0.0;
  for (double v : values) sum += v;
  double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

inline nlohmann::json metrics_to_json(const MetricsReport& m) {
  return {{"tp", m.counts.tp},     {"fp", m.counts.fp},           {"fn", m.counts.fn},
          {"tn", m.counts.tn},     {"precision", m.precision},    {"recall", m.recall},
          {"f1", m.f1},            {"accuracy", m.accuracy}};
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport m;
  m.counts.tp = j.at("tp").get<long long>();
  m.counts.fp = j.at("fp").get<long long>();
  m.counts.fn = j.at("fn").get<long long>();
  m.counts.tn = j.at("tn").get<long long>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.accuracy = j.at("accuracy").get<double>();
  return m;
}

inline nlohmann::json summary_to_json(const EvalSummary& s) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : s.per_fold) folds.push_back(metrics_to_json(f));
  return {{"version", kReportSchemaVersion},
          {"cohort", s.cohort},
          {"model", s.model},
          {"plan", s.plan},
          {"seed", s.seed},
          {"folds", std::move(folds)},
          {"mean_f1", s.mean_f1},
          {"pooled_f1", s.pooled.f1}};
}

inline EvalSummary summary_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kReportSchemaVersion)
    throw SchemaError("unsupported report schema version");
  EvalSummary s;
  s.cohort = j.at("cohort").get<std::string>();
  s.model = j.at("model").get<std::string>();
  s.plan = j.at("plan").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  ConfusionCounts pooled;
  for (const auto& f : j.at("folds")) {
    s.per_fold.push_back(metrics_from_json(f));
    pooled.tp += s.per_fold.back().counts.tp;
    pooled.fp += s.per_fold.back().counts.fp;
    pooled.fn += s.per_fold.back().counts.fn;
    pooled.tn += s.per_fold.back().counts.tn;
  }
  s.mean_f1 = j.at("mean_f1").get<double>();
  s.pooled = prf1(pooled);
  return s;
}

}  // namespace yrisk
