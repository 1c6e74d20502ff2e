#include "msbop/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "msbop/error.hpp"
#include "msbop/random.hpp"
#include "msbop/text.hpp"

namespace msbop {

namespace {

using Index = Eigen::Index;

std::ofstream open_csv(const std::string& path, const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& c : comments) out << "# " << c << '\n';
  return out;
}

double pairwise_sum_range(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, n - half);
}

// Loadings against F, tolerating all-zero factor columns (they get zero load).
Eigen::MatrixXd loadings_skipping_empty(const Eigen::MatrixXd& factors, const Eigen::MatrixXd& data,
                                        const NnlsOptions& inner) {
  std::vector<Index> live;
  for (Index j = 0; j < factors.cols(); ++j)
    if (!(factors.col(j).array() == 0.0).all()) live.push_back(j);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(factors.cols(), data.cols());
  if (live.empty()) return out;
  Eigen::MatrixXd reduced(factors.rows(), static_cast<Index>(live.size()));
  for (std::size_t a = 0; a < live.size(); ++a) reduced.col(static_cast<Index>(a)) = factors.col(live[a]);
  const Eigen::MatrixXd part = loadings_for(reduced, data, inner);
  for (std::size_t a = 0; a < live.size(); ++a) out.row(live[a]) = part.row(static_cast<Index>(a));
  return out;
}

}  // namespace

std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  std::size_t best = 0;
  for (Index i = 1; i < values.size(); ++i)
    if (values(i) > values(static_cast<Index>(best))) best = static_cast<std::size_t>(i);
  return best;
}

double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum_range(values.data(), values.size());
}

TrainTestSplit split_train_test(const std::vector<std::optional<std::string>>& labels, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("split: fraction must lie in (0, 1]");
  const bool stratify =
      !labels.empty() && std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[stratify ? *labels[i] : std::string()].push_back(i);

  Rng rng(seed);
  TrainTestSplit out;
  for (auto& [label, members] : groups) {
    rng.shuffle(members);
    const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < members.size(); ++i) (i < n_train ? out.train : out.test).push_back(members[i]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Eigen::MatrixXd normalize_loadings(const Eigen::MatrixXd& loadings) {
  Eigen::MatrixXd out = loadings;
  for (Index j = 0; j < out.cols(); ++j) {
    const double sum = out.col(j).sum();
    if (sum > 0.0) out.col(j) /= sum;
    else out.col(j).setConstant(1.0 / static_cast<double>(out.rows()));
  }
  return out;
}

Eigen::MatrixXd mean_loading_by_label(const Eigen::MatrixXd& loadings,
                                      const std::vector<std::size_t>& label_index,
                                      std::size_t num_labels) {
  if (label_index.size() != static_cast<std::size_t>(loadings.cols()))
    throw DataError("label map: one label per loading column required");
  const Eigen::MatrixXd normalized = normalize_loadings(loadings);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(loadings.rows(), static_cast<Index>(num_labels));
  std::vector<std::size_t> counts(num_labels, 0);
  for (std::size_t i = 0; i < label_index.size(); ++i) {
    if (label_index[i] >= num_labels) throw DataError("label map: label index out of range");
    sums.col(static_cast<Index>(label_index[i])) += normalized.col(static_cast<Index>(i));
    ++counts[label_index[i]];
  }
  for (std::size_t l = 0; l < num_labels; ++l) {
    if (counts[l] == 0)
      throw ConfigError("label map: label " + std::to_string(l) + " has no training samples");
    sums.col(static_cast<Index>(l)) /= static_cast<double>(counts[l]);
  }
  return sums;
}

LabelMap learn_label_map(const Eigen::MatrixXd& loadings, const std::vector<std::size_t>& label_index,
                         const std::vector<std::string>& labels) {
  if (labels.empty()) throw ConfigError("label map: empty label list");
  const Eigen::MatrixXd means = mean_loading_by_label(loadings, label_index, labels.size());
  LabelMap map;
  map.labels = labels;
  for (Index j = 0; j < means.rows(); ++j) map.assignment.push_back(argmax_lowest(means.row(j).transpose()));
  return map;
}

LabelMap balanced_label_map(std::size_t k, const std::vector<std::string>& labels) {
  if (labels.empty()) throw ConfigError("label map: empty label list");
  LabelMap map;
  map.labels = labels;
  for (std::size_t j = 0; j < k; ++j) map.assignment.push_back(j % labels.size());
  return map;
}

Eigen::VectorXd soft_label_distribution(const Eigen::Ref<const Eigen::VectorXd>& loading, const LabelMap& map) {
  if (static_cast<std::size_t>(loading.size()) != map.assignment.size())
    throw DataError("soft labels: loading length does not match the label map");
  const auto n_labels = static_cast<Index>(map.labels.size());
  const double total = loading.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Constant(n_labels, 1.0 / static_cast<double>(n_labels));
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(n_labels);
  for (Index j = 0; j < loading.size(); ++j)
    dist(static_cast<Index>(map.assignment[static_cast<std::size_t>(j)])) += loading(j) / total;
  return dist;
}

int zero_one_loss(const Eigen::Ref<const Eigen::VectorXd>& distribution, std::size_t true_label) {
  return argmax_lowest(distribution) == true_label ? 0 : 1;
}

double log_loss(const Eigen::Ref<const Eigen::VectorXd>& distribution, std::size_t true_label) {
  return -std::log(std::max(distribution(static_cast<Index>(true_label)), kLogClamp));
}

Eigen::MatrixXd confusion_matrix(const Eigen::MatrixXd& loadings, const LabelMap& map,
                                 const std::vector<std::size_t>& true_labels) {
  const auto n_labels = static_cast<Index>(map.labels.size());
  if (true_labels.size() != static_cast<std::size_t>(loadings.cols()))
    throw DataError("confusion: one true label per loading column required");
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(n_labels, n_labels);
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_labels), 0);
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    rows.row(static_cast<Index>(true_labels[i])) +=
        soft_label_distribution(loadings.col(static_cast<Index>(i)), map).transpose();
    ++counts[true_labels[i]];
  }
  for (Index l = 0; l < n_labels; ++l) {
    const double sum = rows.row(l).sum();
    if (counts[static_cast<std::size_t>(l)] == 0 || !(sum > 0.0))
      rows.row(l).setConstant(1.0 / static_cast<double>(n_labels));
    else
      rows.row(l) /= sum;
  }
  return rows;
}

EvalReport evaluate(const Eigen::MatrixXd& loadings, const LabelMap& map,
                    const std::vector<std::size_t>& true_labels, const std::string& method) {
  if (true_labels.size() != static_cast<std::size_t>(loadings.cols()))
    throw DataError("evaluate: one true label per loading column required");
  EvalReport r;
  r.method = method;
  r.k = static_cast<std::size_t>(loadings.rows());
  r.labels = map.labels;
  std::vector<double> logs, zeros;
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    if (true_labels[i] >= map.labels.size()) throw DataError("evaluate: true label out of range");
    const Eigen::VectorXd dist = soft_label_distribution(loadings.col(static_cast<Index>(i)), map);
    SampleLoss s{true_labels[i], log_loss(dist, true_labels[i]), zero_one_loss(dist, true_labels[i])};
    logs.push_back(s.log_loss);
    zeros.push_back(s.zero_one);
    r.samples.push_back(s);
  }
  const double n = static_cast<double>(true_labels.size());
  r.mean_log_loss = true_labels.empty() ? 0.0 : pairwise_sum(logs) / n;
  r.mean_zero_one_loss = true_labels.empty() ? 0.0 : pairwise_sum(zeros) / n;
  r.confusion = confusion_matrix(loadings, map, true_labels);
  return r;
}

LabelIndex index_labels(const std::vector<std::string>& per_sample) {
  LabelIndex out;
  out.labels = per_sample;
  std::sort(out.labels.begin(), out.labels.end());
  out.labels.erase(std::unique(out.labels.begin(), out.labels.end()), out.labels.end());
  for (const auto& l : per_sample)
    out.index.push_back(static_cast<std::size_t>(std::lower_bound(out.labels.begin(), out.labels.end(), l) -
                                                 out.labels.begin()));
  return out;
}

MethodLoadings run_method(const std::string& method, const Eigen::MatrixXd& train,
                          const Eigen::MatrixXd& test, std::size_t k, std::uint64_t seed,
                          const MethodOptions& options) {
  const auto n_train = static_cast<std::size_t>(train.cols());
  const auto n_test = static_cast<std::size_t>(test.cols());
  MethodLoadings out;
  if (method == "nnmf") {
    const FactorModel m = anls_fit(train, k, seed, options.anls);
    out.train = m.loadings;
    out.test = loadings_skipping_empty(m.factors, test, options.anls.inner);
  } else if (method == "gmm") {
    const GaussianMixture g = fit_gmm(train, k, seed, options.gmm);
    out.train = g.responsibilities(train);
    out.test = g.responsibilities(test);
  } else if (method == "kmeans") {
    const KMeansResult km = kmeans(train, k, seed, options.kmeans);
    out.train = one_hot(km.assignments, k);
    std::vector<std::size_t> assigned(n_test);
    for (std::size_t i = 0; i < n_test; ++i)
      assigned[i] = nearest_centroid(test.col(static_cast<Index>(i)), km.centroids);
    out.test = one_hot(assigned, k);
  } else if (method == "uniform") {
    out.train = uniform_partition(n_train, k).loadings;
    out.test = uniform_partition(n_test, k).loadings;
  } else if (method == "random") {
    out.train = random_partition(n_train, k, seed).loadings;
    out.test = random_partition(n_test, k, derive_seed(seed, 1)).loadings;
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }
  return out;
}

EvalReport evaluate_split(const std::string& method, std::size_t k, const MethodLoadings& loadings,
                          const LabelIndex& labels, const TrainTestSplit& split) {
  std::vector<std::size_t> train_labels, test_labels;
  for (std::size_t i : split.train) train_labels.push_back(labels.index[i]);
  for (std::size_t i : split.test) test_labels.push_back(labels.index[i]);
  const LabelMap map = method == "uniform" ? balanced_label_map(k, labels.labels)
                                           : learn_label_map(loadings.train, train_labels, labels.labels);
  return evaluate(loadings.test, map, test_labels, method);
}

std::vector<SweepRow> sweep_clusters(const Eigen::MatrixXd& data, const std::vector<std::string>& labels,
                                     const SweepOptions& options, std::uint64_t seed) {
  if (labels.size() != static_cast<std::size_t>(data.cols()))
    throw DataError("sweep: one label per feature column required");
  for (const auto& m : options.methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw ConfigError("sweep: unknown method '" + m + "'");

  const LabelIndex index = index_labels(labels);
  std::vector<std::optional<std::string>> optional_labels(labels.begin(), labels.end());
  const TrainTestSplit split = split_train_test(optional_labels, options.train_fraction, derive_seed(seed, 0x5117));

  Eigen::MatrixXd train(data.rows(), static_cast<Index>(split.train.size()));
  Eigen::MatrixXd test(data.rows(), static_cast<Index>(split.test.size()));
  for (std::size_t j = 0; j < split.train.size(); ++j) train.col(static_cast<Index>(j)) = data.col(static_cast<Index>(split.train[j]));
  for (std::size_t j = 0; j < split.test.size(); ++j) test.col(static_cast<Index>(j)) = data.col(static_cast<Index>(split.test[j]));

  std::vector<SweepRow> rows;
  for (std::size_t mi = 0; mi < options.methods.size(); ++mi) {
    const std::string& method = options.methods[mi];
    for (std::size_t k : options.k_values) {
      SweepRow row;
      row.method = method;
      row.k = k;
      try {
        const MethodLoadings loadings =
            run_method(method, train, test, k, derive_seed(seed, 1000 * (mi + 1) + k), options.method);
        const EvalReport report = evaluate_split(method, k, loadings, index, split);
        row.mean_log_loss = report.mean_log_loss;
        row.mean_zero_one_loss = report.mean_zero_one_loss;
      } catch (const InsufficientDataError& e) {
        row.skipped = true;
        row.reason = e.what();
      } catch (const ConfigError& e) {
        row.skipped = true;
        row.reason = e.what();
      } catch (const NumericalError& e) {
        row.skipped = true;
        row.reason = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const std::vector<std::string>& header_comments) {
  std::ofstream out = open_csv(path, header_comments);
  out << "method,k,mean_log_loss,mean_zero_one_loss,status\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.k << ',';
    if (r.skipped) out << ",,skipped\n";
    else out << format_real(r.mean_log_loss) << ',' << format_real(r.mean_zero_one_loss) << ",ok\n";
  }
}

void write_summary_csv(const std::string& path, const EvalReport& report,
                       const std::vector<std::string>& header_comments) {
  std::ofstream out = open_csv(path, header_comments);
  out << "method,k,samples,mean_log_loss,mean_zero_one_loss,log_clamp\n";
  out << report.method << ',' << report.k << ',' << report.samples.size() << ','
      << format_real(report.mean_log_loss) << ',' << format_real(report.mean_zero_one_loss) << ','
      << format_real(report.log_clamp) << '\n';
}

void write_samples_csv(const std::string& path, const EvalReport& report, const std::vector<std::string>& ids,
                       const std::vector<std::string>& header_comments) {
  if (ids.size() != report.samples.size()) throw DataError("samples csv: id count mismatch");
  std::ofstream out = open_csv(path, header_comments);
  out << "id,label,log_loss,zero_one_loss\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& s = report.samples[i];
    out << ids[i] << ',' << report.labels[s.true_label] << ',' << format_real(s.log_loss) << ','
        << s.zero_one << '\n';
  }
}

void write_confusion_csv(const std::string& path, const EvalReport& report,
                         const std::vector<std::string>& header_comments) {
  std::ofstream out = open_csv(path, header_comments);
  out << "truth";
  for (const auto& l : report.labels) out << ',' << l;
  out << '\n';
  for (Index r = 0; r < report.confusion.rows(); ++r) {
    out << report.labels[static_cast<std::size_t>(r)];
    for (Index c = 0; c < report.confusion.cols(); ++c) out << ',' << format_real(report.confusion(r, c));
    out << '\n';
  }
}

}  // namespace msbop
