#ifndef MSBOP_TOOLS_COMMANDS_HPP
#define MSBOP_TOOLS_COMMANDS_HPP

#include <optional>
#include <string>
#include <vector>

#include "pipeline_config.hpp"

namespace msbop::cli {

// Inputs of each subcommand beyond the shared config. `out` is a directory
// for synth, codebook and evaluate and a file for everything else.
struct SynthArgs {
  std::string out;
};

struct CodebookArgs {
  std::string signals;
  std::string out;
};

struct TransformArgs {
  std::string signals;
  std::vector<std::string> codebooks;  // files, or a single directory of codebook_scale*.txt
  std::string out;
};

struct FitArgs {
  std::vector<std::string> features;  // more than one: per-sensor matrices, stacked
  std::optional<std::string> fixed;   // fixed-factor matrix; column ids name the slots
  std::optional<std::size_t> k;
  std::string out;
};

struct LoadingsArgs {
  std::string model;
  std::string features;
  std::string out;
};

struct EvaluateArgs {
  std::string loadings;  // partition or model file
  std::string labels;
  std::optional<std::string> method;
  std::string out;
};

struct SweepArgs {
  std::string features;
  std::string labels;
  std::string out;
};

void run_synth(const PipelineConfig& config, const SynthArgs& args);
void run_codebook(const PipelineConfig& config, const CodebookArgs& args);
void run_transform(const PipelineConfig& config, const TransformArgs& args);
void run_fit(const PipelineConfig& config, const FitArgs& args);
void run_loadings(const PipelineConfig& config, const LoadingsArgs& args);
void run_evaluate(const PipelineConfig& config, const EvaluateArgs& args);
void run_sweep(const PipelineConfig& config, const SweepArgs& args);

}  // namespace msbop::cli

#endif
