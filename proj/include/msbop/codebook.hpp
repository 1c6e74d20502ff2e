#ifndef MSBOP_CODEBOOK_HPP
#define MSBOP_CODEBOOK_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msbop/signal.hpp"

namespace msbop {

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-4;  // on the largest centroid shift (Euclidean)
};

struct KMeansResult {
  Eigen::MatrixXd centroids;             // dim x k
  std::vector<std::size_t> assignments;  // one per point
  double inertia = 0.0;                  // sum of squared distances to assigned centroid
  std::vector<double> inertia_trace;     // inertia after each assignment step
  std::size_t iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm with k-means++ seeding. `points` holds one point per
// column. An emptied cluster is re-seeded at the point farthest from its
// current centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

// Index of the nearest column of `centroids` in squared Euclidean distance,
// ties to the lowest index.
std::size_t nearest_centroid(const Eigen::Ref<const Eigen::VectorXd>& point,
                             const Eigen::MatrixXd& centroids);

struct Codebook {
  std::size_t scale = 0;
  Eigen::MatrixXd centroids;  // (scale * axes) x k, one word per column

  std::size_t size() const { return static_cast<std::size_t>(centroids.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(centroids.rows()); }
};

std::size_t nearest_word(const Patch& patch, const Codebook& codebook);

struct CodebookOptions {
  std::vector<std::size_t> scales{4, 8, 16};
  std::vector<std::size_t> sizes{25, 25, 25};
  // Fraction of pooled patches kept before clustering; 1 keeps all.
  std::optional<double> sampling;
  KMeansOptions kmeans;
};

// One codebook per scale, in scale order. Signals shorter than a scale
// contribute no patches at that scale.
std::vector<Codebook> generate_codebooks(const std::vector<Signal>& signals,
                                         const CodebookOptions& options, std::uint64_t seed);

// Text format: optional '# key=value' lines, then `scale=<l> k=<k> dim=<d>`,
// then k lines of d space-separated values.
void write_codebook(std::ostream& out, const Codebook& codebook,
                    const std::vector<std::string>& header_comments = {});
Codebook read_codebook(std::istream& in);
void save_codebook(const std::string& path, const Codebook& codebook,
                   const std::vector<std::string>& header_comments = {});
Codebook load_codebook(const std::string& path);

}  // namespace msbop

#endif
