#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "yrisk/cohortgen.hpp"
#include "yrisk/error.hpp"
#include "yrisk/eval.hpp"
#include "yrisk/models.hpp"
#include "yrisk/stats.hpp"
#include "yrisk/survey.hpp"
#include "yrisk/tune.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInsufficientData = 2;

// Everything a batch run needs; every field maps to a CLI flag or config key.
struct RunConfig {
  std::string input;
  std::vector<std::string> cohorts = {"all"};
  std::string label = "q25";
  int k = 4;
  double alpha = 0.05;
  std::vector<std::string> models = {"svm", "logistic", "decision_tree", "random_forest", "ann"};
  std::vector<std::string> plans = {"cv", "holdout"};
  std::uint64_t seed = 42;
  std::string out_dir = "reports";
  std::vector<std::string> formats = {"json", "csv"};

  // run/tune extras
  std::vector<std::string> features;  // explicit feature ids, all cohorts
  std::string from_select;            // directory holding select_<cohort>.json
  std::string mlp_config_path;        // best-config JSON emitted by tune
  bool pooled = false;                // table CSV reports pooled F1 instead of fold means
  bool normalize = false;             // min-max scale features before training
  std::map<std::string, std::vector<std::string>> cohort_features;  // resolved (manifest replay)
  std::map<std::string, nlohmann::json> model_configs;              // resolved (manifest replay)
};

inline std::string canonical_cohort(std::string_view name) {
  if (name == "all" || name == "allraces" || name == "all_races") return "all";
  if (name == "asian") return "asian";
  if (name == "black") return "black";
  if (name == "latino" || name == "hispanic") return "latino";
  if (name.rfind("race:", 0) == 0 && name.size() == 6) return std::string("race_") + name[5];
  throw DomainError("unknown cohort: " + std::string(name) +
                    " (expected all, asian, black, latino or race:<letter>)");
}

inline CohortFilter cohort_filter(std::string_view canonical) {
  if (canonical == "all") return CohortFilter::all_races();
  if (canonical == "asian") return CohortFilter::race_exact('B');
  if (canonical == "black") return CohortFilter::race_exact('C');
  if (canonical == "latino") return CohortFilter::hispanic_latino();
  if (canonical.rfind("race_", 0) == 0 && canonical.size() == 6)
    return CohortFilter::race_exact(canonical[5]);
  throw DomainError("unknown cohort: " + std::string(canonical));
}

inline bool wants_format(const RunConfig& cfg, std::string_view fmt) {
  for (const auto& f : cfg.formats)
    if (f == fmt) return true;
  return false;
}

namespace detail {

inline SurveyTable load_cleaned(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input: " + path);
  return clean_table(parse_survey_csv(in));
}

inline std::uint64_t stage_seed(std::uint64_t root, const std::string& tag) { return mix_seed(root, tag); }

}  // namespace detail

// ---- select ---------------------------------------------------------------

struct SelectReport {
  std::string cohort;
  bool ok = false;
  std::string reason;
  std::size_t n_rows = 0;
  std::size_t n_labeled = 0;
  double baseline = 0.0;
  SelectionResult selection;
};

inline SelectReport select_for_cohort(const SurveyTable& cleaned, const std::string& cohort,
                                      const RunConfig& cfg) {
  SelectReport report;
  report.cohort = cohort;
  try {
    SurveyTable t = apply_filter(cleaned, cohort_filter(cohort));
    report.n_rows = t.n_rows();
    if (t.n_rows() == 0) throw DataError("cohort is empty after filtering");
    auto labels = binarize_label(t, cfg.label);
    for (const auto& v : labels) report.n_labeled += static_cast<std::size_t>(v.has_value());
    double p0 = baseline_proportion(labels);
    report.baseline = p0;
    auto scores = score_features(t, labels, cfg.label, p0);
    if (scores.empty()) throw DataError("no scorable questions");
    report.selection = select_top_k(scores, cfg.k, cfg.alpha, cfg.label);
    report.ok = true;
  } catch (const DataError& e) {
    report.reason = e.what();
  } catch (const DomainError& e) {
    report.reason = e.what();
  }
  return report;
}

inline nlohmann::json select_report_to_json(const SelectReport& r, const RunConfig& cfg) {
  nlohmann::json j{{"version", kReportSchemaVersion},
                   {"cohort", r.cohort},
                   {"status", r.ok ? "ok" : "insufficient_data"}};
  if (!r.ok) {
    j["reason"] = r.reason;
    return j;
  }
  j["n_rows"] = r.n_rows;
  j["n_labeled"] = r.n_labeled;
  j["baseline"] = r.baseline;
  j["alpha"] = cfg.alpha;
  j["k"] = cfg.k;
  j["selected"] = r.selection.selected;
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : r.selection.scores)
    scores.push_back({{"question", s.question},
                      {"z", s.z},
                      {"p", format_p(s.p, s.log10_p)},
                      {"log10_p", s.log10_p},
                      {"n_sub", s.n_sub},
                      {"p_hat", s.p_hat},
                      {"p0", s.p0},
                      {"response_value", s.response_value},
                      {"passes_alpha", s.passes(cfg.alpha)}});
  j["scores"] = std::move(scores);
  return j;
}

inline std::vector<SelectReport> run_select(const RunConfig& cfg) {
  SurveyTable cleaned = detail::load_cleaned(cfg.input);
  std::vector<SelectReport> reports;
  for (const auto& raw : cfg.cohorts) reports.push_back(select_for_cohort(cleaned, canonical_cohort(raw), cfg));
  return reports;
}

inline int cmd_select(const RunConfig& cfg) {
  auto reports = run_select(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  bool any_insufficient = false;
  for (const auto& r : reports) {
    if (wants_format(cfg, "json"))
      write_file_atomic(std::filesystem::path(cfg.out_dir) / ("select_" + r.cohort + ".json"),
                        select_report_to_json(r, cfg).dump(2) + "\n");
    if (wants_format(cfg, "csv") && r.ok)
      write_file_atomic(std::filesystem::path(cfg.out_dir) / ("select_" + r.cohort + ".csv"),
                        selection_to_csv(r.selection));
    any_insufficient |= !r.ok;
  }
  return any_insufficient ? kExitInsufficientData : kExitOk;
}

// ---- run -------------------------------------------------------------------

struct MatrixCell {
  std::string cohort;
  std::string model;
  std::string plan;
  bool ok = false;
  std::string error;
  EvalSummary summary;
};

struct RunResult {
  std::vector<MatrixCell> cells;  // cohort-major, then plan, then model
  std::map<std::string, std::vector<std::string>> features;  // per cohort
  std::map<std::string, nlohmann::json> model_configs;       // per model name
  bool all_ok = true;
};

namespace detail {

inline std::vector<std::string> resolve_features(const RunConfig& cfg, const SurveyTable& cleaned,
                                                 const std::string& cohort) {
  if (!cfg.features.empty()) return cfg.features;
  if (auto it = cfg.cohort_features.find(cohort); it != cfg.cohort_features.end()) return it->second;
  if (!cfg.from_select.empty()) {
    auto path = std::filesystem::path(cfg.from_select) / ("select_" + cohort + ".json");
    auto j = nlohmann::json::parse(read_file(path));
    if (j.at("status").get<std::string>() != "ok")
      throw DataError("select artifact for cohort " + cohort + " reports insufficient data");
    return j.at("selected").get<std::vector<std::string>>();
  }
  SelectReport r = select_for_cohort(cleaned, cohort, cfg);
  if (!r.ok) throw DataError("feature selection failed for cohort " + cohort + ": " + r.reason);
  if (r.selection.selected.empty()) throw DataError("no features pass alpha for cohort " + cohort);
  return r.selection.selected;
}

inline TrainConfig resolve_model_config(const RunConfig& cfg, const std::string& model_name) {
  if (auto it = cfg.model_configs.find(model_name); it != cfg.model_configs.end())
    return train_config_from_json(it->second);
  TrainConfig tc = default_config(parse_model_kind(model_name));
  tc.normalize = cfg.normalize;
  if (tc.kind == ModelKind::Mlp && !cfg.mlp_config_path.empty()) {
    auto j = nlohmann::json::parse(read_file(cfg.mlp_config_path));
    tc.mlp = mlp_config_from_json(j.at("mlp"));
  }
  return tc;
}

}  // namespace detail

inline RunResult run_matrix(const RunConfig& cfg) {
  SurveyTable cleaned = detail::load_cleaned(cfg.input);
  RunResult result;

  for (const auto& model_name : cfg.models)
    result.model_configs[model_name] =
        train_config_to_json(detail::resolve_model_config(cfg, model_name));

  for (const auto& raw_cohort : cfg.cohorts) {
    std::string cohort = canonical_cohort(raw_cohort);
    std::optional<LabeledMatrix> matrix;
    std::string cohort_error;
    try {
      auto features = detail::resolve_features(cfg, cleaned, cohort);
      result.features[cohort] = features;
      SurveyTable t = apply_filter(cleaned, cohort_filter(cohort));
      matrix = build_labeled_matrix(t, features, cfg.label);
      if (matrix->n == 0) throw DataError("no usable rows after dropping missing cells");
    } catch (const Error& e) {
      cohort_error = e.what();
    }

    for (const auto& plan_text : cfg.plans) {
      SplitPlan plan = parse_plan(plan_text);
      plan.seed = detail::stage_seed(cfg.seed, "split/" + cohort + "/" + plan.name());
      for (const auto& model_name : cfg.models) {
        MatrixCell cell;
        cell.cohort = cohort;
        cell.model = model_name;
        cell.plan = plan.name();
        if (!cohort_error.empty()) {
          cell.error = cohort_error;
        } else {
          try {
            TrainConfig tc = train_config_from_json(result.model_configs.at(model_name));
            tc.seed = detail::stage_seed(cfg.seed, "model/" + cohort + "/" + model_name + "/" + plan.name());
            if (tc.kind == ModelKind::Mlp) tc.mlp.input_dim = static_cast<int>(matrix->d);
            cell.summary = evaluate(tc, *matrix, plan);
            cell.summary.cohort = cohort;
            cell.ok = true;
          } catch (const Error& e) {
            cell.error = e.what();
          }
        }
        result.all_ok &= cell.ok;
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

inline std::string matrix_to_csv(const RunConfig& cfg, const RunResult& result) {
  std::string out = "cohort,plan";
  for (const auto& m : cfg.models) {
    out += ',';
    out += m;
  }
  out += '\n';
  for (std::size_t i = 0; i < result.cells.size(); i += cfg.models.size()) {
    out += result.cells[i].cohort;
    out += ',';
    out += result.cells[i].plan;
    for (std::size_t j = 0; j < cfg.models.size(); ++j) {
      const MatrixCell& cell = result.cells[i + j];
      out += ',';
      out += cell.ok ? fmt_fixed(cfg.pooled ? cell.summary.pooled.f1 : cell.summary.mean_f1, 4) : "error";
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json manifest_json(const RunConfig& cfg, const RunResult& result) {
  nlohmann::json features = nlohmann::json::object();
  for (const auto& [cohort, ids] : result.features) features[cohort] = ids;
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [name, config] : result.model_configs) models[name] = config;
  std::vector<std::string> cohorts;
  for (const auto& c : cfg.cohorts) cohorts.push_back(canonical_cohort(c));
  return {{"version", kReportSchemaVersion},
          {"library_version", kLibraryVersion},
          {"command", "run"},
          {"input", cfg.input},
          {"seed", cfg.seed},
          {"label", cfg.label},
          {"k", cfg.k},
          {"alpha", cfg.alpha},
          {"cohorts", cohorts},
          {"models", cfg.models},
          {"plans", cfg.plans},
          {"pooled", cfg.pooled},
          {"formats", cfg.formats},
          {"features", features},
          {"model_configs", models}};
}

inline RunConfig config_from_manifest(const nlohmann::json& j, const std::string& input_override = {}) {
  if (j.at("version").get<int>() != kReportSchemaVersion)
    throw SchemaError("unsupported manifest version");
  RunConfig cfg;
  cfg.input = input_override.empty() ? j.at("input").get<std::string>() : input_override;
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.label = j.at("label").get<std::string>();
  cfg.k = j.at("k").get<int>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.cohorts = j.at("cohorts").get<std::vector<std::string>>();
  cfg.models = j.at("models").get<std::vector<std::string>>();
  cfg.plans = j.at("plans").get<std::vector<std::string>>();
  cfg.pooled = j.at("pooled").get<bool>();
  cfg.formats = j.at("formats").get<std::vector<std::string>>();
  for (const auto& [cohort, ids] : j.at("features").items())
    cfg.cohort_features[cohort] = ids.get<std::vector<std::string>>();
  for (const auto& [name, config] : j.at("model_configs").items()) cfg.model_configs[name] = config;
  return cfg;
}

inline int cmd_run(const RunConfig& cfg) {
  RunResult result = run_matrix(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  auto out = std::filesystem::path(cfg.out_dir);

  if (wants_format(cfg, "json")) {
    for (const auto& cell : result.cells) {
      nlohmann::json j;
      if (cell.ok) {
        j = summary_to_json(cell.summary);
      } else {
        j = {{"version", kReportSchemaVersion}, {"cohort", cell.cohort},   {"model", cell.model},
             {"plan", cell.plan},               {"status", "error"},       {"error", cell.error}};
      }
      write_file_atomic(out / ("run_" + cell.cohort + "_" + cell.model + "_" + cell.plan + ".json"),
                        j.dump(2) + "\n");
    }
  }
  if (wants_format(cfg, "csv")) write_file_atomic(out / "f1_matrix.csv", matrix_to_csv(cfg, result));
  write_file_atomic(out / "manifest.json", manifest_json(cfg, result).dump(2) + "\n");
  return result.all_ok ? kExitOk : kExitError;
}

// ---- tune ------------------------------------------------------------------

struct TuneConfig {
  RunConfig run;
  GridSpec grid;
  bool economical = false;
};

struct TuneResult {
  Leaderboard board;
  std::vector<std::pair<int, double>> epochs_series;  // best (hidden, activation) over epoch range
  int peak_epoch = 0;
};

inline TuneResult run_tune(const TuneConfig& tc) {
  RunConfig cfg = tc.run;
  SurveyTable cleaned = detail::load_cleaned(cfg.input);
  std::string cohort = canonical_cohort(cfg.cohorts.empty() ? "all" : cfg.cohorts.front());
  auto features = detail::resolve_features(cfg, cleaned, cohort);
  SurveyTable t = apply_filter(cleaned, cohort_filter(cohort));
  LabeledMatrix matrix = build_labeled_matrix(t, features, cfg.label);

  GridSpec grid = tc.grid;
  if (tc.economical) grid.hidden_hi = std::min(grid.hidden_hi, 8);
  grid.base.input_dim = static_cast<int>(matrix.d);
  grid.seed = detail::stage_seed(cfg.seed, "tune");
  grid.plan.seed = detail::stage_seed(cfg.seed, "tune-split/" + cohort);

  TuneResult result;
  result.board = grid_search(matrix, grid);

  const GridEntry& best = result.board.best();
  for (const auto& e : result.board.entries) {
    if (!e.ok || e.config.hidden_units != best.config.hidden_units ||
        e.config.activation != best.config.activation)
      continue;
    result.epochs_series.emplace_back(e.config.epochs, e.mean_f1);
  }
  std::sort(result.epochs_series.begin(), result.epochs_series.end());
  double peak = -1.0;
  for (const auto& [epochs, f1] : result.epochs_series) {
    if (f1 > peak) {
      peak = f1;
      result.peak_epoch = epochs;
    }
  }
  return result;
}

inline int cmd_tune(const TuneConfig& tc) {
  TuneResult result = run_tune(tc);
  std::filesystem::create_directories(tc.run.out_dir);
  auto out = std::filesystem::path(tc.run.out_dir);

  write_file_atomic(out / "leaderboard.csv", leaderboard_to_csv(result.board));

  nlohmann::json best = best_config_to_json(result.board);
  best["peak_epoch"] = result.peak_epoch;
  write_file_atomic(out / "best_config.json", best.dump(2) + "\n");

  std::string series = "epochs,mean_f1\n";
  for (const auto& [epochs, f1] : result.epochs_series)
    series += std::to_string(epochs) + "," + fmt_double(f1) + "\n";
  write_file_atomic(out / "epochs_series.csv", series);
  return kExitOk;
}

// ---- synth -----------------------------------------------------------------

inline int cmd_synth(const CohortSpec& spec, const std::string& out_dir, const std::string& name = "synthetic") {
  auto [table, truth] = generate(spec);
  std::filesystem::create_directories(out_dir);
  auto out = std::filesystem::path(out_dir);
  write_file_atomic(out / (name + ".csv"), survey_to_csv(table));
  write_file_atomic(out / (name + "_truth.json"), ground_truth_to_json(truth).dump(2) + "\n");
  return kExitOk;
}

}  // namespace yrisk
