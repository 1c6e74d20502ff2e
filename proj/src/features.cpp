#include "msbop/features.hpp"

#include <exception>
#include <optional>

#include "msbop/error.hpp"
#include "msbop/parallel.hpp"
#include "msbop/text.hpp"

namespace msbop {

std::vector<ScaleSlice> feature_layout(const std::vector<Codebook>& codebooks) {
  std::vector<ScaleSlice> layout;
  std::size_t offset = 0;
  for (const auto& cb : codebooks) {
    layout.push_back({cb.scale, offset, cb.size()});
    offset += cb.size();
  }
  return layout;
}

MsBopVector msbop_transform(const Signal& signal, const std::vector<Codebook>& codebooks,
                            bool normalize) {
  if (codebooks.empty()) throw ConfigError("msbop: no codebooks");
  MsBopVector out;
  out.layout = feature_layout(codebooks);
  const std::size_t p = out.layout.back().offset + out.layout.back().length;
  out.counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));

  std::size_t fitted = 0;
  for (std::size_t i = 0; i < codebooks.size(); ++i) {
    const Codebook& cb = codebooks[i];
    if (cb.dim() != cb.scale * signal.num_axes())
      throw DataError("shape error: codebook for scale " + std::to_string(cb.scale) + " has dimension " +
                      std::to_string(cb.dim()) + ", signal '" + signal.id() + "' has " +
                      std::to_string(signal.num_axes()) + " axes");
    const std::size_t count = patch_count(signal.length(), cb.scale);
    if (count == 0) {
      warn("signal '" + signal.id() + "' is shorter than scale " + std::to_string(cb.scale) +
           "; its slice stays zero");
      continue;
    }
    ++fitted;
    auto slice = out.counts.segment(static_cast<Eigen::Index>(out.layout[i].offset),
                                    static_cast<Eigen::Index>(out.layout[i].length));
    const Eigen::MatrixXd patches = patch_matrix(signal, cb.scale);
    for (Eigen::Index j = 0; j < patches.cols(); ++j)
      slice(static_cast<Eigen::Index>(nearest_centroid(patches.col(j), cb.centroids))) += 1.0;
    if (normalize) slice /= static_cast<double>(count);
  }
  if (fitted == 0)
    throw InsufficientDataError("empty feature: every scale exceeds the length " +
                                std::to_string(signal.length()) + " of signal '" + signal.id() + "'");
  return out;
}

FeatureBuild build_feature_matrix(const std::vector<Signal>& signals,
                                  const std::vector<Codebook>& codebooks, bool normalize) {
  if (codebooks.empty()) throw ConfigError("msbop: no codebooks");
  const auto layout = feature_layout(codebooks);
  const std::size_t p = layout.back().offset + layout.back().length;

  std::vector<std::optional<MsBopVector>> columns(signals.size());
  std::vector<std::string> failures(signals.size());
  parallel_for(signals.size(), [&](std::size_t i) {
    try {
      columns[i] = msbop_transform(signals[i], codebooks, normalize);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  FeatureBuild out;
  out.features.layout = layout;
  std::size_t kept = 0;
  for (const auto& c : columns) kept += c.has_value();
  if (!signals.empty() && kept == 0)
    throw DataError("no signal could be transformed; first failure: " + failures.front());

  out.features.values.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(kept));
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (!columns[i]) {
      out.skipped.push_back({signals[i].id(), failures[i]});
      continue;
    }
    out.features.values.col(col++) = columns[i]->counts;
    out.features.ids.push_back(signals[i].id());
  }
  return out;
}

FeatureMatrix stack_multi_sensor(const std::vector<FeatureMatrix>& per_sensor) {
  if (per_sensor.empty()) throw ConfigError("stack: no feature matrices");
  const FeatureMatrix& first = per_sensor.front();
  std::size_t rows = 0;
  for (const auto& m : per_sensor) {
    if (m.cols() != first.cols()) throw DataError("alignment error: column counts differ");
    if (m.ids != first.ids) throw DataError("alignment error: column ids differ");
    rows += m.rows();
  }
  FeatureMatrix out;
  out.ids = first.ids;
  out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(first.cols()));
  std::size_t offset = 0;
  for (const auto& m : per_sensor) {
    out.values.middleRows(static_cast<Eigen::Index>(offset), m.values.rows()) = m.values;
    for (auto slice : m.layout) {
      slice.offset += offset;
      out.layout.push_back(slice);
    }
    offset += m.rows();
  }
  return out;
}

FeatureMatrix select_columns(const FeatureMatrix& features, const std::vector<std::size_t>& columns) {
  FeatureMatrix out;
  out.layout = features.layout;
  out.values.resize(features.values.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= features.cols()) throw DataError("select_columns: index out of range");
    out.values.col(static_cast<Eigen::Index>(j)) = features.values.col(static_cast<Eigen::Index>(columns[j]));
    out.ids.push_back(features.ids[columns[j]]);
  }
  return out;
}

std::string format_layout(const std::vector<ScaleSlice>& layout) {
  std::vector<std::string> parts;
  for (const auto& s : layout)
    parts.push_back(std::to_string(s.scale) + ":" + std::to_string(s.offset) + ":" +
                    std::to_string(s.length));
  return join(parts, ",");
}

std::vector<ScaleSlice> parse_layout(const std::string& text) {
  std::vector<ScaleSlice> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) {
    const auto fields = split(part, ':');
    if (fields.size() != 3) throw DataError("layout: malformed entry '" + part + "'");
    const auto scale = parse_integer(fields[0]);
    const auto offset = parse_integer(fields[1]);
    const auto length = parse_integer(fields[2]);
    if (!scale || !offset || !length || *scale <= 0 || *offset < 0 || *length < 0)
      throw DataError("layout: malformed entry '" + part + "'");
    out.push_back({static_cast<std::size_t>(*scale), static_cast<std::size_t>(*offset),
                   static_cast<std::size_t>(*length)});
  }
  return out;
}

void save_features(const std::string& path, const FeatureMatrix& features, Metadata meta) {
  meta.set("kind", "features");
  meta.set("layout", format_layout(features.layout));
  save_matrix(path, {features.values, features.ids}, meta);
}

FeatureMatrix load_features(const std::string& path, Metadata* meta) {
  Metadata local;
  LabeledMatrix m = load_matrix(path, &local);
  FeatureMatrix out;
  out.values = std::move(m.values);
  out.ids = std::move(m.column_ids);
  if (auto layout = local.get("layout")) out.layout = parse_layout(*layout);
  if (!out.values.allFinite()) throw DataError("features in '" + path + "' contain non-finite values");
  if ((out.values.array() < 0.0).any()) throw DataError("features in '" + path + "' contain negative values");
  if (meta) *meta = std::move(local);
  return out;
}

}  // namespace msbop
