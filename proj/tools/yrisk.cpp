// yrisk: survey-based depression screening pipeline.
//
//   yrisk synth  -- generate a synthetic coded-survey cohort with planted effects
//   yrisk select -- score questions against the depression label, pick top-k
//   yrisk run    -- train/evaluate the model matrix (cohorts x models x plans)
//   yrisk tune   -- grid-search the neural net (neurons x activation x epochs)

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "yrisk/pipeline.hpp"

namespace {

void add_common_options(CLI::App* cmd, yrisk::RunConfig& cfg, bool needs_input = true) {
  auto* input = cmd->add_option("--input", cfg.input, "input survey CSV");
  if (needs_input) input->required();
  cmd->add_option("--cohort", cfg.cohorts, "cohorts to process: all, asian, black, latino, race:<letter>")->delimiter(',');
  cmd->add_option("--label", cfg.label, "label question id (default q25)");
  cmd->add_option("--k", cfg.k, "number of features to select (default 4)");
  cmd->add_option("--alpha", cfg.alpha, "significance level (default 0.05)");
  cmd->add_option("--seed", cfg.seed, "root seed; every stage seed derives from it");
  cmd->add_option("--out", cfg.out_dir, "output directory")->envname("YRISK_OUT");
  cmd->add_option("--format", cfg.formats, "report formats: json, csv")->delimiter(',');
}

std::pair<int, int> parse_range(const std::string& text, const char* what) {
  auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError(std::string(what) + ": expected <n> or <lo>:<hi>, got '" + text + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded-survey depression screening pipeline"};
  app.require_subcommand(1);
  // key=value config mirroring every flag under a [subcommand] section;
  // command-line flags override file values
  app.set_config("--config", "", "config file with [select]/[run]/[tune]/[synth] sections");

  yrisk::RunConfig select_cfg;
  auto* select = app.add_subcommand("select", "score questions and select the top-k risk factors");
  add_common_options(select, select_cfg);

  yrisk::RunConfig run_cfg;
  std::string manifest_path;
  auto* run = app.add_subcommand("run", "train and evaluate every (cohort, model, plan) cell");
  add_common_options(run, run_cfg, /*needs_input=*/false);
  run->add_option("--models", run_cfg.models, "models to run: svm logistic decision_tree random_forest ann")->delimiter(',');
  run->add_option("--plan", run_cfg.plans, "split plans: cv[:k], holdout[:fraction]")->delimiter(',');
  run->add_option("--features", run_cfg.features, "explicit feature ids (skips selection)")->delimiter(',');
  run->add_option("--from-select", run_cfg.from_select, "directory with select_<cohort>.json artifacts");
  run->add_option("--mlp-config", run_cfg.mlp_config_path, "best-config JSON from the tune command");
  run->add_flag("--pooled", run_cfg.pooled, "report pooled-confusion F1 in the matrix CSV");
  run->add_flag("--normalize", run_cfg.normalize, "min-max scale features before training (off by default)");
  run->add_option("--manifest", manifest_path, "replay a previous run from its manifest");

  yrisk::TuneConfig tune_cfg;
  std::string hidden_range = "1:40", epoch_range = "5:20", tune_plan = "holdout";
  std::vector<std::string> tune_acts;
  auto* tune = app.add_subcommand("tune", "grid-search MLP hyperparameters");
  add_common_options(tune, tune_cfg.run);
  tune->add_option("--hidden", hidden_range, "hidden-unit range <lo>:<hi> (default 1:40)");
  tune->add_option("--epochs", epoch_range, "epoch range <lo>:<hi> (default 5:20)");
  tune->add_option("--activations", tune_acts, "activation subset (default: all nine)")->delimiter(',');
  tune->add_option("--plan", tune_plan, "split plan for every cell (default holdout)");
  tune->add_flag("--economical", tune_cfg.economical, "restrict hidden units to 1:8");
  tune->add_option("--features", tune_cfg.run.features, "explicit feature ids (skips selection)")->delimiter(',');
  tune->add_option("--batch-size", tune_cfg.grid.base.batch_size, "minibatch size (default 32)");

  yrisk::CohortSpec synth_spec;
  std::string synth_out = "reports", synth_name = "synthetic";
  std::vector<std::string> plant_flags;
  auto* synth = app.add_subcommand("synth", "generate a synthetic survey cohort with planted effects");
  synth->add_option("--rows", synth_spec.n_rows, "number of respondents")->required();
  synth->add_option("--questions", synth_spec.n_questions, "number of questions (default 99)");
  synth->add_option("--base-rate", synth_spec.base_rate, "depression base rate (default 0.40)");
  synth->add_option("--plant", plant_flags,
                    "planted effect <q>:<cond_rate>[:<resp1_prob>], e.g. 7:0.6 or q7:0.6:0.5");
  synth->add_option("--seed", synth_spec.seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory")->envname("YRISK_OUT");
  synth->add_option("--name", synth_name, "output file stem (default synthetic)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed()) return yrisk::cmd_select(select_cfg);

    if (run->parsed()) {
      if (!manifest_path.empty()) {
        auto manifest = nlohmann::json::parse(yrisk::read_file(manifest_path));
        yrisk::RunConfig replay = yrisk::config_from_manifest(manifest, run_cfg.input);
        replay.out_dir = run_cfg.out_dir;
        return yrisk::cmd_run(replay);
      }
      if (run_cfg.input.empty()) throw yrisk::DomainError("run: --input or --manifest required");
      return yrisk::cmd_run(run_cfg);
    }

    if (tune->parsed()) {
      auto [h_lo, h_hi] = parse_range(hidden_range, "--hidden");
      auto [e_lo, e_hi] = parse_range(epoch_range, "--epochs");
      tune_cfg.grid.hidden_lo = h_lo;
      tune_cfg.grid.hidden_hi = h_hi;
      tune_cfg.grid.epochs_lo = e_lo;
      tune_cfg.grid.epochs_hi = e_hi;
      tune_cfg.grid.activations = tune_acts;
      tune_cfg.grid.plan = yrisk::parse_plan(tune_plan);
      return yrisk::cmd_tune(tune_cfg);
    }

    if (synth->parsed()) {
      for (const auto& flag : plant_flags) {
        yrisk::PlantedEffect effect;
        std::string body = flag;
        if (!body.empty() && body[0] == 'q') body.erase(0, 1);
        auto first = body.find(':');
        if (first == std::string::npos) throw yrisk::DomainError("--plant: expected <q>:<cond_rate>");
        effect.question = std::stoi(body.substr(0, first));
        auto rest = body.substr(first + 1);
        auto second = rest.find(':');
        effect.cond_rate = std::stod(rest.substr(0, second));
        if (second != std::string::npos) effect.response1_prob = std::stod(rest.substr(second + 1));
        synth_spec.planted.push_back(effect);
      }
      return yrisk::cmd_synth(synth_spec, synth_out, synth_name);
    }
  } catch (const yrisk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return yrisk::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return yrisk::kExitError;
  }
  return yrisk::kExitOk;
}
