#ifndef MSBOP_FEATURES_HPP
#define MSBOP_FEATURES_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "msbop/codebook.hpp"
#include "msbop/matrix_io.hpp"
#include "msbop/signal.hpp"

namespace msbop {

// Which rows of a descriptor belong to which codebook.
struct ScaleSlice {
  std::size_t scale = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const ScaleSlice&) const = default;
};

std::vector<ScaleSlice> feature_layout(const std::vector<Codebook>& codebooks);

// Multi-scale bag-of-patches descriptor: per scale, the histogram of
// nearest-word indices over all patches, concatenated in codebook order.
struct MsBopVector {
  Eigen::VectorXd counts;
  std::vector<ScaleSlice> layout;
};

// Scales longer than the signal yield an all-zero slice and a warning;
// InsufficientDataError if no scale fits. With `normalize`, each non-empty
// slice is divided by its patch count.
MsBopVector msbop_transform(const Signal& signal, const std::vector<Codebook>& codebooks,
                            bool normalize);

// Descriptors column-stacked over a dataset (p x N), ids aligned to columns.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> ids;
  std::vector<ScaleSlice> layout;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

struct SkippedSignal {
  std::string id;
  std::string reason;
};

struct FeatureBuild {
  FeatureMatrix features;
  std::vector<SkippedSignal> skipped;
};

// Columnwise msbop_transform in input order. Signals that fail are dropped
// and reported; the call throws only when every signal fails.
FeatureBuild build_feature_matrix(const std::vector<Signal>& signals,
                                  const std::vector<Codebook>& codebooks, bool normalize);

// Row-concatenation of per-sensor matrices sharing column ids.
FeatureMatrix stack_multi_sensor(const std::vector<FeatureMatrix>& per_sensor);

// Keeps only the listed columns, in the listed order.
FeatureMatrix select_columns(const FeatureMatrix& features, const std::vector<std::size_t>& columns);

std::string format_layout(const std::vector<ScaleSlice>& layout);
std::vector<ScaleSlice> parse_layout(const std::string& text);

void save_features(const std::string& path, const FeatureMatrix& features, Metadata meta = {});
FeatureMatrix load_features(const std::string& path, Metadata* meta = nullptr);

}  // namespace msbop

#endif
