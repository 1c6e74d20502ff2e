#ifndef MSBOP_SIGNAL_HPP
#define MSBOP_SIGNAL_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace msbop {

using MixtureProportions = std::map<std::string, double>;

// One fixed-rate multi-axis sensor burst. Immutable once constructed; the
// constructor enforces equal axis lengths, a positive sample rate and a
// well-formed mixture annotation.
class Signal {
 public:
  Signal(std::string id, std::vector<std::vector<double>> axes, double sample_rate_hz,
         std::optional<std::string> label = std::nullopt,
         std::optional<MixtureProportions> true_mix = std::nullopt,
         std::string sensor_kind = "acc");

  const std::string& id() const { return id_; }
  const std::string& sensor_kind() const { return sensor_kind_; }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& axis(std::size_t a) const { return axes_[a]; }
  std::size_t num_axes() const { return axes_.size(); }
  std::size_t length() const { return axes_.front().size(); }
  double sample_rate_hz() const { return sample_rate_hz_; }
  const std::optional<std::string>& label() const { return label_; }
  const std::optional<MixtureProportions>& true_mix() const { return true_mix_; }

  bool operator==(const Signal&) const = default;

 private:
  std::string id_;
  std::vector<std::vector<double>> axes_;
  double sample_rate_hz_;
  std::optional<std::string> label_;
  std::optional<MixtureProportions> true_mix_;
  std::string sensor_kind_;
};

// A length-`scale` window over every axis, flattened axis-major:
// values[a * scale + t] = axis a at offset t.
struct Patch {
  std::size_t scale = 0;
  Eigen::VectorXd values;
};

// All N - scale + 1 patches, in start order. Throws InsufficientDataError
// when scale > N.
std::vector<Patch> extract_patches(const Signal& signal, std::size_t scale);

// Same patches as extract_patches, one per column of a (scale*axes) x count
// matrix. Returns an empty (dim x 0) matrix when scale > N.
Eigen::MatrixXd patch_matrix(const Signal& signal, std::size_t scale);

// Number of patches of a given scale, 0 when the scale does not fit.
inline std::size_t patch_count(std::size_t length, std::size_t scale) {
  return scale == 0 || scale > length ? 0 : length - scale + 1;
}

// Column layout of a signal CSV. Empty axis_columns means "every column
// that is neither the id nor the label".
struct CsvSchema {
  std::string id_column = "id";
  std::vector<std::string> axis_columns;
  std::optional<std::string> label_column = "label";
  double sample_rate_hz = 10.0;
  std::string sensor_kind = "acc";
};

// Reads `id,<axis...>[,label]` rows. Lines starting with '#' are metadata
// and skipped. Signals come back sorted by id.
std::vector<Signal> load_signals(const std::string& path, const CsvSchema& schema = {});

// Writes signals in the same CSV layout; `header_comments` become leading
// '#' lines.
void write_signals(const std::string& path, const std::vector<Signal>& signals,
                   const std::vector<std::string>& header_comments = {});

// Ground-truth mixture sidecar: `id,label,proportion` rows.
void write_true_mix(const std::string& path, const std::vector<Signal>& signals,
                    const std::vector<std::string>& header_comments = {});
std::map<std::string, MixtureProportions> load_true_mix(const std::string& path);

// `id,label` rows; convenient input for evaluation.
void write_labels(const std::string& path, const std::vector<Signal>& signals,
                  const std::vector<std::string>& header_comments = {});
std::map<std::string, std::string> load_labels(const std::string& path);

}  // namespace msbop

#endif
