#ifndef MSBOP_EVALUATION_HPP
#define MSBOP_EVALUATION_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msbop/factorize.hpp"
#include "msbop/partition.hpp"

namespace msbop {

// Probabilities below this are clamped before taking logs.
inline constexpr double kLogClamp = 1e-12;

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);

// Sum in a fixed pairwise order.
double pairwise_sum(const std::vector<double>& values);

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending sample indices
  std::vector<std::size_t> test;
};

// Seeded shuffle; the first ceil(fraction * n) go to train. Stratified per
// label when every sample is labelled.
TrainTestSplit split_train_test(const std::vector<std::optional<std::string>>& labels, double fraction,
                                std::uint64_t seed);

// Each partition j is assigned labels[assignment[j]].
struct LabelMap {
  std::vector<std::size_t> assignment;
  std::vector<std::string> labels;

  const std::string& label_of(std::size_t partition) const { return labels[assignment[partition]]; }
};

// Columns scaled to unit L1 norm; an all-zero column becomes uniform.
Eigen::MatrixXd normalize_loadings(const Eigen::MatrixXd& loadings);

// k x |labels| mean normalized loading of each partition over the samples
// of each label. ConfigError if a label has no samples.
Eigen::MatrixXd mean_loading_by_label(const Eigen::MatrixXd& loadings,
                                      const std::vector<std::size_t>& label_index,
                                      std::size_t num_labels);

// Each partition goes to the label with the highest mean loading.
LabelMap learn_label_map(const Eigen::MatrixXd& loadings, const std::vector<std::size_t>& label_index,
                         const std::vector<std::string>& labels);

// Partition j -> label j mod |labels|. Used for the uniform control, where
// every label ties for every partition.
LabelMap balanced_label_map(std::size_t k, const std::vector<std::string>& labels);

// Distribution over labels; an all-zero loading maps to uniform.
Eigen::VectorXd soft_label_distribution(const Eigen::Ref<const Eigen::VectorXd>& loading, const LabelMap& map);

int zero_one_loss(const Eigen::Ref<const Eigen::VectorXd>& distribution, std::size_t true_label);
double log_loss(const Eigen::Ref<const Eigen::VectorXd>& distribution, std::size_t true_label);

// Row per true label: mean soft distribution over that label's samples,
// renormalized. Labels without samples get a uniform row.
Eigen::MatrixXd confusion_matrix(const Eigen::MatrixXd& loadings, const LabelMap& map,
                                 const std::vector<std::size_t>& true_labels);

struct SampleLoss {
  std::size_t true_label = 0;
  double log_loss = 0.0;
  int zero_one = 0;
};

struct EvalReport {
  std::string method;
  std::size_t k = 0;
  double mean_log_loss = 0.0;
  double mean_zero_one_loss = 0.0;
  double log_clamp = kLogClamp;
  std::vector<std::string> labels;
  Eigen::MatrixXd confusion;
  std::vector<SampleLoss> samples;
};

EvalReport evaluate(const Eigen::MatrixXd& loadings, const LabelMap& map,
                    const std::vector<std::size_t>& true_labels, const std::string& method);

// Ordered label list (sorted unique) and the per-sample index into it.
struct LabelIndex {
  std::vector<std::string> labels;
  std::vector<std::size_t> index;
};
LabelIndex index_labels(const std::vector<std::string>& per_sample);

// Loadings for held-out samples under a method trained on `train`.
struct MethodLoadings {
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
};

struct MethodOptions {
  AnlsOptions anls;
  GmmOptions gmm;
  KMeansOptions kmeans;
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"nnmf", "gmm", "kmeans", "uniform", "random"};
  return m;
}

// Throws ConfigError for an unknown method and InsufficientDataError /
// ConfigError when k is infeasible for it.
MethodLoadings run_method(const std::string& method, const Eigen::MatrixXd& train,
                          const Eigen::MatrixXd& test, std::size_t k, std::uint64_t seed,
                          const MethodOptions& options = {});

// Learns the label map on train and scores test with it.
EvalReport evaluate_split(const std::string& method, std::size_t k, const MethodLoadings& loadings,
                          const LabelIndex& labels, const TrainTestSplit& split);

struct SweepRow {
  std::string method;
  std::size_t k = 0;
  double mean_log_loss = 0.0;
  double mean_zero_one_loss = 0.0;
  bool skipped = false;
  std::string reason;
};

struct SweepOptions {
  std::vector<std::string> methods{"nnmf", "gmm", "kmeans", "uniform", "random"};
  std::vector<std::size_t> k_values{5, 10, 20, 30};
  double train_fraction = 0.5;
  MethodOptions method;
};

// For each method and k: fit on the train split, map, score on test.
// Infeasible (method, k) pairs come back as skipped rows.
std::vector<SweepRow> sweep_clusters(const Eigen::MatrixXd& data, const std::vector<std::string>& labels,
                                     const SweepOptions& options, std::uint64_t seed);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const std::vector<std::string>& header_comments = {});
void write_summary_csv(const std::string& path, const EvalReport& report,
                       const std::vector<std::string>& header_comments = {});
void write_samples_csv(const std::string& path, const EvalReport& report, const std::vector<std::string>& ids,
                       const std::vector<std::string>& header_comments = {});
void write_confusion_csv(const std::string& path, const EvalReport& report,
                         const std::vector<std::string>& header_comments = {});

}  // namespace msbop

#endif
