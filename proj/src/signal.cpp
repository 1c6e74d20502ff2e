#include "msbop/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "msbop/error.hpp"
#include "msbop/text.hpp"

namespace msbop {

Signal::Signal(std::string id, std::vector<std::vector<double>> axes, double sample_rate_hz,
               std::optional<std::string> label, std::optional<MixtureProportions> true_mix,
               std::string sensor_kind)
    : id_(std::move(id)),
      axes_(std::move(axes)),
      sample_rate_hz_(sample_rate_hz),
      label_(std::move(label)),
      true_mix_(std::move(true_mix)),
      sensor_kind_(std::move(sensor_kind)) {
  if (axes_.empty()) throw DataError("signal '" + id_ + "': no axes");
  const std::size_t n = axes_.front().size();
  if (n == 0) throw DataError("signal '" + id_ + "': empty axes");
  for (const auto& axis : axes_)
    if (axis.size() != n) throw DataError("signal '" + id_ + "': axes have different lengths");
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
    throw DataError("signal '" + id_ + "': sample rate must be positive");
  if (true_mix_) {
    double total = 0.0;
    for (const auto& [name, share] : *true_mix_) {
      if (!(share >= 0.0)) throw DataError("signal '" + id_ + "': negative mixture share");
      total += share;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw DataError("signal '" + id_ + "': mixture shares do not sum to 1");
  }
}

Eigen::MatrixXd patch_matrix(const Signal& signal, std::size_t scale) {
  const std::size_t n = signal.length();
  const std::size_t axes = signal.num_axes();
  const std::size_t count = patch_count(n, scale);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(scale * axes), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t a = 0; a < axes; ++a) {
      const auto& axis = signal.axis(a);
      for (std::size_t t = 0; t < scale; ++t)
        out(static_cast<Eigen::Index>(a * scale + t), static_cast<Eigen::Index>(i)) = axis[i + t];
    }
  return out;
}

std::vector<Patch> extract_patches(const Signal& signal, std::size_t scale) {
  if (scale == 0) throw ConfigError("patch scale must be positive");
  if (scale > signal.length())
    throw InsufficientDataError("scale " + std::to_string(scale) + " exceeds length " +
                                std::to_string(signal.length()) + " of signal '" +
                                signal.id() + "'");
  const Eigen::MatrixXd m = patch_matrix(signal, scale);
  std::vector<Patch> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.cols(); ++i) out.push_back({scale, m.col(i)});
  return out;
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

// Yields (line number, fields) for non-empty, non-comment lines.
template <class Fn>
void for_each_csv_row(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> fields = split(t, ',');
    for (auto& f : fields) f = std::string(trim(f));
    fn(line_no, std::move(fields));
  }
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("schema error: missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<Signal> load_signals(const std::string& path, const CsvSchema& schema) {
  std::ifstream in = open_input(path);

  struct Pending {
    std::vector<std::vector<double>> axes;
    std::optional<std::string> label;
  };
  std::map<std::string, Pending> pending;

  std::vector<std::string> header;
  std::size_t id_col = 0;
  std::optional<std::size_t> label_col;
  std::vector<std::size_t> axis_cols;

  for_each_csv_row(in, [&](std::size_t line_no, std::vector<std::string> fields) {
    if (header.empty()) {
      header = std::move(fields);
      id_col = column_index(header, schema.id_column);
      if (schema.label_column) {
        const auto it = std::find(header.begin(), header.end(), *schema.label_column);
        if (it != header.end()) label_col = static_cast<std::size_t>(it - header.begin());
      }
      if (schema.axis_columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c)
          if (c != id_col && (!label_col || c != *label_col)) axis_cols.push_back(c);
      } else {
        for (const auto& name : schema.axis_columns) axis_cols.push_back(column_index(header, name));
      }
      if (axis_cols.empty()) throw DataError("schema error: no axis columns");
      return;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != header.size())
      throw DataError("format error at " + where + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    const std::string& id = fields[id_col];
    if (id.empty()) throw DataError("format error at " + where + ": empty id");
    Pending& p = pending[id];
    if (p.axes.empty()) p.axes.resize(axis_cols.size());
    for (std::size_t a = 0; a < axis_cols.size(); ++a) {
      const std::string& token = fields[axis_cols[a]];
      if (token.empty()) continue;  // missing sample; caught by the ragged check
      const auto v = parse_real(token);
      if (!v || !std::isfinite(*v))
        throw DataError("parse error at " + where + ": '" + token + "' is not a number");
      p.axes[a].push_back(*v);
    }
    if (label_col && !fields[*label_col].empty()) {
      if (p.label && *p.label != fields[*label_col])
        throw DataError("format error at " + where + ": conflicting labels for id '" + id + "'");
      p.label = fields[*label_col];
    }
  });

  std::vector<Signal> out;
  out.reserve(pending.size());
  for (auto& [id, p] : pending) {  // std::map iterates in id order
    const std::size_t n = p.axes.front().size();
    for (const auto& axis : p.axes)
      if (axis.size() != n)
        throw DataError("format error: ragged axis lengths for id '" + id + "'");
    if (n == 0) throw DataError("format error: id '" + id + "' has no samples");
    out.emplace_back(id, std::move(p.axes), schema.sample_rate_hz, p.label, std::nullopt,
                     schema.sensor_kind);
  }
  return out;
}

void write_signals(const std::string& path, const std::vector<Signal>& signals,
                   const std::vector<std::string>& header_comments) {
  std::ofstream out = open_output(path);
  write_comments(out, header_comments);
  const std::size_t axes = signals.empty() ? 3 : signals.front().num_axes();
  bool any_label = false;
  for (const auto& s : signals) {
    if (s.num_axes() != axes) throw DataError("cannot write signals with differing axis counts");
    any_label = any_label || s.label().has_value();
  }
  out << "id";
  for (std::size_t a = 0; a < axes; ++a) out << ",axis" << a;
  if (any_label) out << ",label";
  out << '\n';
  for (const auto& s : signals) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      out << s.id();
      for (std::size_t a = 0; a < axes; ++a) out << ',' << format_real(s.axis(a)[t]);
      if (any_label) out << ',' << s.label().value_or("");
      out << '\n';
    }
  }
}

void write_true_mix(const std::string& path, const std::vector<Signal>& signals,
                    const std::vector<std::string>& header_comments) {
  std::ofstream out = open_output(path);
  write_comments(out, header_comments);
  out << "id,label,proportion\n";
  for (const auto& s : signals) {
    if (!s.true_mix()) continue;
    for (const auto& [label, share] : *s.true_mix())
      out << s.id() << ',' << label << ',' << format_real(share) << '\n';
  }
}

std::map<std::string, MixtureProportions> load_true_mix(const std::string& path) {
  std::ifstream in = open_input(path);
  std::map<std::string, MixtureProportions> out;
  bool header = true;
  for_each_csv_row(in, [&](std::size_t line_no, std::vector<std::string> fields) {
    if (header) {
      header = false;
      return;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 3) throw DataError("format error at " + where);
    const auto v = parse_real(fields[2]);
    if (!v) throw DataError("parse error at " + where + ": '" + fields[2] + "'");
    out[fields[0]][fields[1]] = *v;
  });
  return out;
}

void write_labels(const std::string& path, const std::vector<Signal>& signals,
                  const std::vector<std::string>& header_comments) {
  std::ofstream out = open_output(path);
  write_comments(out, header_comments);
  out << "id,label\n";
  for (const auto& s : signals)
    if (s.label()) out << s.id() << ',' << *s.label() << '\n';
}

std::map<std::string, std::string> load_labels(const std::string& path) {
  std::ifstream in = open_input(path);
  std::map<std::string, std::string> out;
  std::vector<std::string> header;
  std::size_t id_col = 0, label_col = 1;
  for_each_csv_row(in, [&](std::size_t line_no, std::vector<std::string> fields) {
    if (header.empty()) {
      header = std::move(fields);
      id_col = column_index(header, "id");
      label_col = column_index(header, "label");
      return;
    }
    if (fields.size() != header.size())
      throw DataError("format error at " + path + ":" + std::to_string(line_no));
    if (fields[label_col].empty()) return;
    const auto [it, inserted] = out.emplace(fields[id_col], fields[label_col]);
    if (!inserted && it->second != fields[label_col])
      throw DataError("format error at " + path + ":" + std::to_string(line_no) +
                      ": conflicting labels for id '" + fields[id_col] + "'");
  });
  return out;
}

}  // namespace msbop
