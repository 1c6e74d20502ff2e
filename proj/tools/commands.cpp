#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "msbop/codebook.hpp"
#include "msbop/error.hpp"
#include "msbop/evaluation.hpp"
#include "msbop/factorize.hpp"
#include "msbop/features.hpp"
#include "msbop/parallel.hpp"
#include "msbop/partition.hpp"
#include "msbop/random.hpp"
#include "msbop/signal.hpp"
#include "msbop/synthetic.hpp"
#include "msbop/text.hpp"

namespace fs = std::filesystem;

namespace msbop::cli {

namespace {

using Index = Eigen::Index;

std::vector<std::string> stamp(const PipelineConfig& config, const std::string& command) {
  return {"command=" + command, "config_hash=" + config_hash(config), "seed=" + std::to_string(config.seed)};
}

Metadata stamp_meta(const PipelineConfig& config, const std::string& command) {
  Metadata m;
  m.set("command", command);
  m.set("config_hash", config_hash(config));
  return m;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

std::string codebook_filename(std::size_t scale) { return "codebook_scale" + std::to_string(scale) + ".txt"; }

std::vector<Codebook> load_codebooks(const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  if (paths.size() == 1 && fs::is_directory(paths.front())) {
    for (const auto& entry : fs::directory_iterator(paths.front())) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("codebook_scale", 0) == 0 && entry.path().extension() == ".txt")
        files.push_back(entry.path().string());
    }
    if (files.empty()) throw DataError("no codebook_scale*.txt files in '" + paths.front() + "'");
  } else {
    files = paths;
  }
  std::vector<Codebook> books;
  for (const auto& f : files) books.push_back(load_codebook(f));
  std::sort(books.begin(), books.end(), [](const Codebook& a, const Codebook& b) { return a.scale < b.scale; });
  for (std::size_t i = 1; i < books.size(); ++i)
    if (books[i].scale == books[i - 1].scale)
      throw DataError("two codebooks for scale " + std::to_string(books[i].scale));
  return books;
}

// Column ids of a fixed-factor file are slot numbers, bare or as factor<j>.
std::map<std::size_t, Eigen::VectorXd> load_fixed(const std::string& path, std::size_t rows, std::size_t k) {
  const LabeledMatrix m = load_matrix(path);
  if (static_cast<std::size_t>(m.values.rows()) != rows)
    throw DataError("fixed factors in '" + path + "' have " + std::to_string(m.values.rows()) +
                    " rows, features have " + std::to_string(rows));
  std::map<std::size_t, Eigen::VectorXd> fixed;
  for (std::size_t j = 0; j < m.column_ids.size(); ++j) {
    std::string id = m.column_ids[j];
    if (id.rfind("factor", 0) == 0) id = id.substr(6);
    const auto slot = parse_integer(id);
    if (!slot || *slot < 0 || static_cast<std::size_t>(*slot) >= k)
      throw DataError("fixed factor id '" + m.column_ids[j] + "' is not a slot below k=" + std::to_string(k));
    if (!fixed.emplace(static_cast<std::size_t>(*slot), m.values.col(static_cast<Index>(j))).second)
      throw DataError("fixed factor slot " + id + " given twice");
  }
  return fixed;
}

std::vector<std::string> labels_for(const std::vector<std::string>& ids, const std::string& labels_path) {
  const auto labels = load_labels(labels_path);
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw DataError("no label for sample '" + id + "' in '" + labels_path + "'");
    out.push_back(it->second);
  }
  return out;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = m.col(static_cast<Index>(cols[j]));
  return out;
}

}  // namespace

void run_synth(const PipelineConfig& config, const SynthArgs& args) {
  const std::vector<Signal> signals = generate_dataset(config.synth, config.seed);
  make_dir(args.out);
  const auto header = stamp(config, "synth");
  write_signals((fs::path(args.out) / "signals.csv").string(), signals, header);
  write_true_mix((fs::path(args.out) / "true_mix.csv").string(), signals, header);
  write_labels((fs::path(args.out) / "labels.csv").string(), signals, header);
}

void run_codebook(const PipelineConfig& config, const CodebookArgs& args) {
  const std::vector<Signal> signals = load_signals(args.signals, config.schema);
  const std::vector<Codebook> books = generate_codebooks(signals, config.codebook, config.seed);
  make_dir(args.out);
  const auto header = stamp(config, "codebook");
  for (const auto& book : books) save_codebook((fs::path(args.out) / codebook_filename(book.scale)).string(), book, header);
}

void run_transform(const PipelineConfig& config, const TransformArgs& args) {
  const std::vector<Signal> signals = load_signals(args.signals, config.schema);
  const std::vector<Codebook> books = load_codebooks(args.codebooks);
  const FeatureBuild build = build_feature_matrix(signals, books, config.normalize);
  for (const auto& s : build.skipped) warn("skipped signal '" + s.id + "': " + s.reason);
  Metadata meta = stamp_meta(config, "transform");
  meta.set("normalized", config.normalize ? "true" : "false");
  meta.set("skipped", std::to_string(build.skipped.size()));
  save_features(args.out, build.features, meta);
}

void run_fit(const PipelineConfig& config, const FitArgs& args) {
  if (args.features.empty()) throw ConfigError("fit: at least one feature matrix is required");
  std::vector<FeatureMatrix> sensors;
  for (const auto& path : args.features) sensors.push_back(load_features(path));
  const FeatureMatrix data = sensors.size() == 1 ? sensors.front() : stack_multi_sensor(sensors);
  const std::size_t k = args.k.value_or(config.k);

  FactorModel model;
  std::string mode;
  if (args.fixed) {
    model = semi_supervised_fit(data.values, k, load_fixed(*args.fixed, data.rows(), k), config.seed, config.anls);
    mode = "semi_supervised";
  } else if (config.sample_fraction < 1.0) {
    model = sample_then_fit(data.values, k, config.sample_fraction, config.seed, config.anls);
    mode = "sampled";
  } else {
    model = anls_fit(data.values, k, config.seed, config.anls);
    mode = "anls";
  }
  if (!model.converged) warn("fit: stopped at max_iter before reaching tol");

  Metadata meta = stamp_meta(config, "fit");
  meta.set("mode", mode);
  meta.set("tol", format_real(config.anls.tol));
  meta.set("sensors", std::to_string(sensors.size()));
  meta.set("layout", format_layout(data.layout));
  save_model(args.out, model, data.ids, meta);
}

void run_loadings(const PipelineConfig& config, const LoadingsArgs& args) {
  const FactorModel model = load_model(args.model);
  const FeatureMatrix data = load_features(args.features);
  if (data.rows() != static_cast<std::size_t>(model.factors.rows()))
    throw DataError("loadings: model has " + std::to_string(model.factors.rows()) + " feature rows, data has " +
                    std::to_string(data.rows()));
  Partition p{model.k, loadings_for(model.factors, data.values, config.anls.inner), "nnmf"};
  save_partition(args.out, p, data.ids, stamp_meta(config, "loadings"));
}

void run_evaluate(const PipelineConfig& config, const EvaluateArgs& args) {
  Metadata meta;
  std::vector<std::string> ids;
  Eigen::MatrixXd loadings;
  std::string method;
  {
    std::ifstream in(args.loadings);
    if (!in) throw DataError("cannot open '" + args.loadings + "'");
    MatrixReader reader(in);
    reader.next_block();
    meta = reader.metadata();
  }
  if (meta.get("kind") == std::optional<std::string>("factor_model")) {
    const FactorModel model = load_model(args.loadings, &ids);
    loadings = model.loadings;
    method = "nnmf";
  } else {
    Partition p = load_partition(args.loadings, &ids);
    loadings = std::move(p.loadings);
    method = p.method;
  }
  if (args.method) method = *args.method;
  if (loadings.size() && ((loadings.array() < 0.0).any() || !loadings.allFinite()))
    throw DataError("evaluate: loadings must be finite and non-negative");

  const std::vector<std::string> labels = labels_for(ids, args.labels);
  const LabelIndex index = index_labels(labels);
  const TrainTestSplit split = split_train_test(std::vector<std::optional<std::string>>(labels.begin(), labels.end()),
                                                config.train_fraction, derive_seed(config.seed, 0x5117));
  if (split.test.empty()) throw InsufficientDataError("evaluate: no held-out samples; lower train_fraction");
  const MethodLoadings ml{take_columns(loadings, split.train), take_columns(loadings, split.test)};
  const std::size_t k = static_cast<std::size_t>(loadings.rows());
  const EvalReport report = evaluate_split(method, k, ml, index, split);

  std::vector<std::string> test_ids;
  for (std::size_t i : split.test) test_ids.push_back(ids[i]);
  make_dir(args.out);
  const auto header = stamp(config, "evaluate");
  write_summary_csv((fs::path(args.out) / "summary.csv").string(), report, header);
  write_samples_csv((fs::path(args.out) / "samples.csv").string(), report, test_ids, header);
  write_confusion_csv((fs::path(args.out) / "confusion.csv").string(), report, header);
}

void run_sweep(const PipelineConfig& config, const SweepArgs& args) {
  const FeatureMatrix data = load_features(args.features);
  const std::vector<std::string> labels = labels_for(data.ids, args.labels);
  SweepOptions opts;
  opts.methods = config.methods;
  opts.k_values = config.k_values;
  opts.train_fraction = config.train_fraction;
  opts.method = method_options(config);
  const std::vector<SweepRow> rows = sweep_clusters(data.values, labels, opts, config.seed);
  for (const auto& r : rows)
    if (r.skipped) warn("sweep: " + r.method + " k=" + std::to_string(r.k) + " skipped: " + r.reason);
  write_sweep_csv(args.out, rows, stamp(config, "sweep"));
}

}  // namespace msbop::cli
