#include "msbop/matrix_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "msbop/error.hpp"
#include "msbop/text.hpp"

namespace msbop {

void Metadata::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

std::optional<std::string> Metadata::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::string Metadata::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw DataError("missing metadata field '" + key + "'");
  return *v;
}

void write_metadata(std::ostream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta.entries()) out << "# " << k << '=' << v << '\n';
}

void write_matrix_block(std::ostream& out, const LabeledMatrix& matrix) {
  const auto& m = matrix.values;
  if (matrix.column_ids.size() != static_cast<std::size_t>(m.cols()))
    throw DataError("matrix: column id count does not match column count");
  for (const auto& id : matrix.column_ids)
    if (id.empty() || id.find_first_of(" \t\r\n") != std::string::npos)
      throw DataError("matrix: column id '" + id + "' is empty or contains whitespace");
  out << "rows=" << m.rows() << " cols=" << m.cols() << '\n';
  out << join(matrix.column_ids, " ") << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_real(m(r, c));
    }
    out << '\n';
  }
}

bool MatrixReader::next_content_line(std::string& line) {
  while (std::getline(in_, line)) {
    ++line_no_;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos)
        meta_.set(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
      continue;
    }
    line = std::string(t);
    return true;
  }
  return false;
}

std::optional<LabeledMatrix> MatrixReader::next_block() {
  std::string line;
  if (!next_content_line(line)) return std::nullopt;
  long long rows = -1, cols = -1;
  for (const auto& field : split(line, ' ')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw DataError("matrix: malformed header '" + line + "'");
    const auto v = parse_integer(std::string_view(field).substr(eq + 1));
    if (!v) throw DataError("matrix: malformed header '" + line + "'");
    const std::string key = field.substr(0, eq);
    if (key == "rows") rows = *v;
    else if (key == "cols") cols = *v;
  }
  if (rows < 0 || cols < 0) throw DataError("matrix: malformed header '" + line + "'");

  LabeledMatrix out;
  // id line is read raw: it is legitimately empty when cols=0
  if (!std::getline(in_, line)) throw DataError("matrix: missing column id line");
  ++line_no_;
  std::istringstream ids(line);
  for (std::string id; ids >> id;) out.column_ids.push_back(id);
  if (out.column_ids.size() != static_cast<std::size_t>(cols))
    throw DataError("matrix: expected " + std::to_string(cols) + " column ids at line " +
                    std::to_string(line_no_));

  out.values.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    // with no columns every row line is blank, so blank lines cannot be skipped
    const bool got = cols == 0 ? static_cast<bool>(std::getline(in_, line)) && (++line_no_, true)
                               : next_content_line(line);
    if (!got) throw DataError("matrix: expected " + std::to_string(rows) + " rows");
    std::istringstream row(line);
    Eigen::Index c = 0;
    for (std::string token; row >> token;) {
      const auto v = parse_real(token);
      if (!v) throw DataError("matrix: parse error at line " + std::to_string(line_no_));
      if (c >= cols) throw DataError("matrix: too many values at line " + std::to_string(line_no_));
      out.values(r, c++) = *v;
    }
    if (c != cols) throw DataError("matrix: too few values at line " + std::to_string(line_no_));
  }
  return out;
}

void save_matrix(const std::string& path, const LabeledMatrix& matrix, const Metadata& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_metadata(out, meta);
  write_matrix_block(out, matrix);
}

LabeledMatrix load_matrix(const std::string& path, Metadata* meta) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  MatrixReader reader(in);
  auto block = reader.next_block();
  if (!block) throw DataError("'" + path + "' holds no matrix");
  if (meta) *meta = reader.metadata();
  return std::move(*block);
}

}  // namespace msbop
