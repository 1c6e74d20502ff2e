#ifndef MSBOP_TOOLS_PIPELINE_CONFIG_HPP
#define MSBOP_TOOLS_PIPELINE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msbop/codebook.hpp"
#include "msbop/evaluation.hpp"
#include "msbop/factorize.hpp"
#include "msbop/signal.hpp"
#include "msbop/synthetic.hpp"

namespace msbop::cli {

// Every tunable of the pipeline. Loaded from a flat INI file with sections;
// anything not set keeps the default shown by `msbop --help`.
struct PipelineConfig {
  std::uint64_t seed = 0;

  CsvSchema schema;  // [signal] sample_rate_hz, sensor_kind
  SynthConfig synth;  // [synth] and [archetype.<name>]
  CodebookOptions codebook;  // [codebook]
  bool normalize = true;     // [features]

  // [fit]
  std::size_t k = 5;
  AnlsOptions anls;
  double sample_fraction = 1.0;

  GmmOptions gmm;  // [gmm]

  double train_fraction = 0.5;  // [evaluate]

  // [sweep]
  std::vector<std::string> methods{"nnmf", "gmm", "kmeans", "uniform", "random"};
  std::vector<std::size_t> k_values{5, 10, 20, 30};
};

// Empty path yields the defaults. ConfigError on unknown sections or keys,
// malformed values, or violated invariants.
PipelineConfig load_config(const std::string& path);

void validate(const PipelineConfig& config);

// One `section.key=value` line per effective setting, in a fixed order.
std::string canonical_text(const PipelineConfig& config);

// FNV-1a of canonical_text, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

MethodOptions method_options(const PipelineConfig& config);

}  // namespace msbop::cli

#endif
