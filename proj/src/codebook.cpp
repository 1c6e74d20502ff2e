#include "msbop/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "msbop/error.hpp"
#include "msbop/parallel.hpp"
#include "msbop/random.hpp"
#include "msbop/text.hpp"

namespace msbop {

namespace {

using Index = Eigen::Index;

double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                        const Eigen::Ref<const Eigen::VectorXd>& b) {
  return (a - b).squaredNorm();
}

// k-means++: first centre uniform, the rest drawn with probability
// proportional to the squared distance to the nearest chosen centre.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(points.cols());
  Eigen::MatrixXd centroids(points.rows(), static_cast<Index>(k));
  std::size_t pick = rng.index(n);
  centroids.col(0) = points.col(static_cast<Index>(pick));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i)
    d2[i] = squared_distance(points.col(static_cast<Index>(i)), centroids.col(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (total <= 0.0) {
      pick = rng.index(n);
    } else {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n;
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        acc += d2[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    }
    centroids.col(static_cast<Index>(c)) = points.col(static_cast<Index>(pick));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points.col(static_cast<Index>(i)),
                                               centroids.col(static_cast<Index>(c))));
  }
  return centroids;
}

// Assigns every point; returns the summed squared distance.
double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
              std::vector<std::size_t>& assignments, std::vector<double>& distances) {
  const std::size_t n = static_cast<std::size_t>(points.cols());
  parallel_for(n, [&](std::size_t i) {
    const auto p = points.col(static_cast<Index>(i));
    std::size_t best = 0;
    double best_d = squared_distance(p, centroids.col(0));
    for (Index c = 1; c < centroids.cols(); ++c) {
      const double d = squared_distance(p, centroids.col(c));
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::size_t>(c);
      }
    }
    assignments[i] = best;
    distances[i] = best_d;
  });
  double inertia = 0.0;
  for (double d : distances) inertia += d;
  return inertia;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (k == 0) throw ConfigError("kmeans: k must be positive");
  if (options.max_iter == 0) throw ConfigError("kmeans: max_iter must be positive");
  if (options.tol < 0.0) throw ConfigError("kmeans: tol must be non-negative");
  const std::size_t n = static_cast<std::size_t>(points.cols());
  if (n < k)
    throw InsufficientDataError("kmeans: " + std::to_string(n) + " points for k=" + std::to_string(k));
  if (!points.allFinite()) throw DataError("kmeans: non-finite input");

  Rng rng(seed);
  KMeansResult result;
  result.centroids = seed_centroids(points, k, rng);
  result.assignments.assign(n, 0);
  std::vector<double> distances(n, 0.0);

  Eigen::MatrixXd sums(points.rows(), static_cast<Index>(k));
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    result.inertia_trace.push_back(assign(points, result.centroids, result.assignments, distances));
    ++result.iterations;

    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.col(static_cast<Index>(result.assignments[i])) += points.col(static_cast<Index>(i));
      ++counts[result.assignments[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      Eigen::VectorXd updated;
      if (counts[c] > 0) {
        updated = sums.col(static_cast<Index>(c)) / static_cast<double>(counts[c]);
      } else {
        const auto far = std::max_element(distances.begin(), distances.end()) - distances.begin();
        updated = points.col(far);
        distances[static_cast<std::size_t>(far)] = -1.0;  // not reused by another empty cluster
      }
      shift = std::max(shift, (updated - result.centroids.col(static_cast<Index>(c))).norm());
      result.centroids.col(static_cast<Index>(c)) = updated;
    }
    if (shift < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.inertia = assign(points, result.centroids, result.assignments, distances);
  result.inertia_trace.push_back(result.inertia);
  return result;
}

std::size_t nearest_centroid(const Eigen::Ref<const Eigen::VectorXd>& point,
                             const Eigen::MatrixXd& centroids) {
  if (centroids.cols() == 0) throw ConfigError("nearest_centroid: empty centroid set");
  if (point.size() != centroids.rows())
    throw DataError("shape error: point of dimension " + std::to_string(point.size()) +
                    " against centroids of dimension " + std::to_string(centroids.rows()));
  std::size_t best = 0;
  double best_d = squared_distance(point, centroids.col(0));
  for (Index c = 1; c < centroids.cols(); ++c) {
    const double d = squared_distance(point, centroids.col(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

std::size_t nearest_word(const Patch& patch, const Codebook& codebook) {
  return nearest_centroid(patch.values, codebook.centroids);
}

std::vector<Codebook> generate_codebooks(const std::vector<Signal>& signals,
                                         const CodebookOptions& options, std::uint64_t seed) {
  const auto& scales = options.scales;
  if (scales.empty()) throw ConfigError("codebook: no scales given");
  if (scales.size() != options.sizes.size())
    throw ConfigError("codebook: scales and sizes differ in length");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] == 0) throw ConfigError("codebook: scales must be positive");
    if (i > 0 && scales[i] <= scales[i - 1])
      throw ConfigError("codebook: scales must be strictly increasing");
    if (options.sizes[i] == 0) throw ConfigError("codebook: sizes must be positive");
  }
  if (options.sampling && !(*options.sampling > 0.0 && *options.sampling <= 1.0))
    throw ConfigError("codebook: sampling rate must lie in (0, 1]");
  if (signals.empty()) throw InsufficientDataError("codebook: no signals");
  const std::size_t axes = signals.front().num_axes();
  for (const auto& s : signals)
    if (s.num_axes() != axes) throw DataError("codebook: signals differ in axis count");

  std::vector<Codebook> out;
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const std::size_t scale = scales[si];
    const std::size_t k = options.sizes[si];
    std::size_t total = 0;
    for (const auto& s : signals) total += patch_count(s.length(), scale);
    if (total == 0)
      throw InsufficientDataError("codebook: scale " + std::to_string(scale) +
                                  " exceeds every signal length");

    Eigen::MatrixXd pooled(static_cast<Index>(scale * axes), static_cast<Index>(total));
    Index col = 0;
    for (const auto& s : signals) {
      const std::size_t count = patch_count(s.length(), scale);
      if (count == 0) continue;
      pooled.middleCols(col, static_cast<Index>(count)) = patch_matrix(s, scale);
      col += static_cast<Index>(count);
    }

    if (options.sampling && *options.sampling < 1.0) {
      const auto keep = static_cast<std::size_t>(std::ceil(*options.sampling * static_cast<double>(total)));
      Rng rng(derive_seed(seed, 1000 + si));
      std::vector<std::size_t> idx = rng.sample_without_replacement(total, keep);
      std::sort(idx.begin(), idx.end());
      Eigen::MatrixXd sampled(pooled.rows(), static_cast<Index>(idx.size()));
      for (std::size_t j = 0; j < idx.size(); ++j)
        sampled.col(static_cast<Index>(j)) = pooled.col(static_cast<Index>(idx[j]));
      pooled = std::move(sampled);
    }
    if (static_cast<std::size_t>(pooled.cols()) < k)
      throw InsufficientDataError("codebook: scale " + std::to_string(scale) + " has " +
                                  std::to_string(pooled.cols()) + " patches for " +
                                  std::to_string(k) + " words");

    KMeansResult km = kmeans(pooled, k, derive_seed(seed, si), options.kmeans);
    if (!km.converged)
      warn("codebook: k-means at scale " + std::to_string(scale) + " stopped at max_iter");
    out.push_back({scale, std::move(km.centroids)});
  }
  return out;
}

void write_codebook(std::ostream& out, const Codebook& codebook,
                    const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << '\n';
  out << "scale=" << codebook.scale << " k=" << codebook.size() << " dim=" << codebook.dim() << '\n';
  for (Index j = 0; j < codebook.centroids.cols(); ++j) {
    for (Index d = 0; d < codebook.centroids.rows(); ++d) {
      if (d) out << ' ';
      out << format_real(codebook.centroids(d, j));
    }
    out << '\n';
  }
}

Codebook read_codebook(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      line = std::string(t);
      return true;
    }
    return false;
  };
  if (!next_line()) throw DataError("codebook: missing header");

  long long scale = -1, k = -1, dim = -1;
  for (const auto& field : split(line, ' ')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw DataError("codebook: malformed header '" + line + "'");
    const std::string key = field.substr(0, eq);
    const auto value = parse_integer(std::string_view(field).substr(eq + 1));
    if (!value) throw DataError("codebook: malformed header '" + line + "'");
    if (key == "scale") scale = *value;
    else if (key == "k") k = *value;
    else if (key == "dim") dim = *value;
  }
  if (scale <= 0 || k <= 0 || dim <= 0 || dim % scale != 0)
    throw DataError("codebook: invalid header '" + line + "'");

  Codebook cb;
  cb.scale = static_cast<std::size_t>(scale);
  cb.centroids.resize(dim, k);
  for (Index j = 0; j < k; ++j) {
    if (!next_line()) throw DataError("codebook: expected " + std::to_string(k) + " centroids");
    std::istringstream row(line);
    std::string token;
    Index d = 0;
    while (row >> token) {
      const auto v = parse_real(token);
      if (!v) throw DataError("codebook: parse error at line " + std::to_string(line_no));
      if (d >= dim) throw DataError("codebook: too many values at line " + std::to_string(line_no));
      cb.centroids(d++, j) = *v;
    }
    if (d != dim) throw DataError("codebook: too few values at line " + std::to_string(line_no));
  }
  return cb;
}

void save_codebook(const std::string& path, const Codebook& codebook,
                   const std::vector<std::string>& header_comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_codebook(out, codebook, header_comments);
}

Codebook load_codebook(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_codebook(in);
}

}  // namespace msbop
