#ifndef MSBOP_MATRIX_IO_HPP
#define MSBOP_MATRIX_IO_HPP

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace msbop {

// Ordered `# key=value` header lines carried by every text artifact.
class Metadata {
 public:
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;  // DataError if absent
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// One matrix block:
//   rows=<r> cols=<c>
//   <c space-separated column ids>
//   <r lines of c values, 9 significant digits>
struct LabeledMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_ids;
};

void write_metadata(std::ostream& out, const Metadata& meta);
void write_matrix_block(std::ostream& out, const LabeledMatrix& matrix);

// Sequential reader over a stream holding metadata lines followed by one or
// more matrix blocks. Metadata lines may appear before any block.
class MatrixReader {
 public:
  explicit MatrixReader(std::istream& in) : in_(in) {}
  Metadata& metadata() { return meta_; }
  // nullopt at end of input
  std::optional<LabeledMatrix> next_block();

 private:
  bool next_content_line(std::string& line);
  std::istream& in_;
  Metadata meta_;
  std::size_t line_no_ = 0;
};

// Single-block convenience wrappers.
void save_matrix(const std::string& path, const LabeledMatrix& matrix, const Metadata& meta = {});
LabeledMatrix load_matrix(const std::string& path, Metadata* meta = nullptr);

}  // namespace msbop

#endif
