#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "commands.hpp"
#include "msbop/error.hpp"
#include "msbop/parallel.hpp"
#include "pipeline_config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::string defaults_footer() {
  std::string text = "\nConfig file: INI sections, keys shown as section.key with their defaults.\n"
                     "Archetype sections are [archetype.<name>].\n\n";
  text += msbop::cli::canonical_text(msbop::cli::PipelineConfig{});
  text += "\nExit codes: 0 ok, 2 config error, 3 data/format error, 4 numerical failure.\n";
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace msbop::cli;

  CLI::App app{"msbop: multi-scale bag-of-patches features and non-negative factor models for sensor bursts"};
  app.footer(defaults_footer());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out;
  app.add_option("--config", config_path, "INI config file");
  app.add_option("--seed", seed, "Overrides [general] seed");
  app.add_option("--threads", threads, "Worker cap (0 = hardware concurrency); results do not depend on it");
  app.add_option("--out", out, "Output file or directory")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate archetype signals and mixtures (signals.csv, true_mix.csv, labels.csv)");

  CodebookArgs codebook;
  auto* codebook_cmd = app.add_subcommand("codebook", "Learn one codebook per scale (codebook_scale<l>.txt)");
  codebook_cmd->add_option("--signals", codebook.signals, "Signal CSV")->required();

  TransformArgs transform;
  auto* transform_cmd = app.add_subcommand("transform", "MS-BoP feature matrix from signals and codebooks");
  transform_cmd->add_option("--signals", transform.signals, "Signal CSV")->required();
  transform_cmd->add_option("--codebooks", transform.codebooks, "Codebook files or a directory holding them")
      ->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a non-negative factor model");
  fit_cmd->add_option("--features", fit.features, "Feature matrix; repeat for per-sensor matrices")->required();
  fit_cmd->add_option("--fixed", fit.fixed, "Fixed-factor matrix, column ids are slot numbers");
  fit_cmd->add_option("--k", fit.k, "Overrides [fit] k");

  LoadingsArgs loadings;
  auto* loadings_cmd = app.add_subcommand("loadings", "Loadings of new samples under a fitted model");
  loadings_cmd->add_option("--model", loadings.model, "Model file")->required();
  loadings_cmd->add_option("--features", loadings.features, "Feature matrix")->required();

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Map partitions to labels and score held-out samples");
  evaluate_cmd->add_option("--loadings", evaluate.loadings, "Partition, loadings or model file")->required();
  evaluate_cmd->add_option("--labels", evaluate.labels, "CSV of id,label")->required();
  evaluate_cmd->add_option("--method", evaluate.method, "Overrides the method tag of the input");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Loss of every method over a range of k");
  sweep_cmd->add_option("--features", sweep.features, "Feature matrix")->required();
  sweep_cmd->add_option("--labels", sweep.labels, "CSV of id,label")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    PipelineConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    msbop::set_thread_count(threads);

    synth.out = codebook.out = transform.out = fit.out = loadings.out = evaluate.out = sweep.out = out;
    if (*synth_cmd) run_synth(config, synth);
    else if (*codebook_cmd) run_codebook(config, codebook);
    else if (*transform_cmd) run_transform(config, transform);
    else if (*fit_cmd) run_fit(config, fit);
    else if (*loadings_cmd) run_loadings(config, loadings);
    else if (*evaluate_cmd) run_evaluate(config, evaluate);
    else if (*sweep_cmd) run_sweep(config, sweep);
  } catch (const msbop::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case msbop::ErrorKind::config: return kExitConfig;
      case msbop::ErrorKind::data: return kExitData;
      case msbop::ErrorKind::numerical: return kExitNumerical;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
