#ifndef MSBOP_PARTITION_HPP
#define MSBOP_PARTITION_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "msbop/codebook.hpp"
#include "msbop/matrix_io.hpp"

namespace msbop {

// Column-stochastic k x N assignment of samples to partitions; hard
// partitions are one-hot columns.
struct Partition {
  std::size_t k = 0;
  Eigen::MatrixXd loadings;
  std::string method;
};

Partition random_partition(std::size_t n, std::size_t k, std::uint64_t seed);
Partition uniform_partition(std::size_t n, std::size_t k);

// One-hot matrix from hard assignments.
Eigen::MatrixXd one_hot(const std::vector<std::size_t>& assignments, std::size_t k);

// k-means over the columns of `data`.
Partition kmeans_partition(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& options = {});

struct GmmOptions {
  std::size_t max_iter = 200;
  double tol = 1e-6;  // on the per-sample log-likelihood gain
  KMeansOptions init;
};

// Diagonal-covariance Gaussian mixture over columns.
struct GaussianMixture {
  Eigen::VectorXd weights;    // k
  Eigen::MatrixXd means;      // d x k
  Eigen::MatrixXd variances;  // d x k
  std::vector<double> log_likelihood_trace;  // total log-likelihood per EM iteration
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t k() const { return static_cast<std::size_t>(weights.size()); }
  // Posterior responsibilities, k x N, columns summing to 1.
  Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& data) const;
  double log_likelihood(const Eigen::MatrixXd& data) const;
};

// EM started from a k-means run. Variances are floored at
// 1e-6 * (per-feature data variance + 1e-12).
GaussianMixture fit_gmm(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                        const GmmOptions& options = {});

// Responsibilities of the fitted mixture as a soft partition.
Partition gmm_fit(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                  const GmmOptions& options = {});

void save_partition(const std::string& path, const Partition& partition,
                    const std::vector<std::string>& sample_ids, Metadata meta = {});
Partition load_partition(const std::string& path, std::vector<std::string>* sample_ids = nullptr,
                         Metadata* meta = nullptr);

}  // namespace msbop

#endif
