#include "msbop/partition.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "msbop/error.hpp"
#include "msbop/parallel.hpp"
#include "msbop/random.hpp"

namespace msbop {

namespace {

using Index = Eigen::Index;

void require_k(std::size_t k) {
  if (k == 0) throw ConfigError("partition: k must be positive");
}

void require_points(const Eigen::MatrixXd& data, std::size_t k) {
  require_k(k);
  if (static_cast<std::size_t>(data.cols()) < k)
    throw InsufficientDataError("partition: " + std::to_string(data.cols()) + " samples for k=" +
                                std::to_string(k));
}

// Per-component log densities (k x N) including log weights.
Eigen::MatrixXd weighted_log_densities(const GaussianMixture& g, const Eigen::MatrixXd& data) {
  const Index k = g.weights.size();
  const Index d = g.means.rows();
  Eigen::MatrixXd out(k, data.cols());
  Eigen::VectorXd constant(k);
  for (Index c = 0; c < k; ++c) {
    const double log_w = g.weights(c) > 0.0 ? std::log(g.weights(c)) : -std::numeric_limits<double>::infinity();
    constant(c) = log_w - 0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                                 g.variances.col(c).array().log().sum());
  }
  parallel_for(static_cast<std::size_t>(data.cols()), [&](std::size_t col) {
    const auto i = static_cast<Index>(col);
    for (Index c = 0; c < k; ++c)
      out(c, i) = constant(c) -
                  0.5 * ((data.col(i) - g.means.col(c)).array().square() / g.variances.col(c).array()).sum();
  });
  return out;
}

// Column-wise log-sum-exp; also turns `log_dens` into normalized posteriors.
double normalize_posteriors(Eigen::MatrixXd& log_dens) {
  double total = 0.0;
  for (Index i = 0; i < log_dens.cols(); ++i) {
    const double top = log_dens.col(i).maxCoeff();
    const double lse = top + std::log((log_dens.col(i).array() - top).exp().sum());
    log_dens.col(i) = (log_dens.col(i).array() - lse).exp();
    log_dens.col(i) /= log_dens.col(i).sum();
    total += lse;
  }
  return total;
}

}  // namespace

Eigen::MatrixXd one_hot(const std::vector<std::size_t>& assignments, std::size_t k) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Index>(k), static_cast<Index>(assignments.size()));
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] >= k) throw DataError("one_hot: assignment out of range");
    out(static_cast<Index>(assignments[i]), static_cast<Index>(i)) = 1.0;
  }
  return out;
}

Partition random_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  require_k(k);
  Rng rng(seed);
  std::vector<std::size_t> a(n);
  for (auto& v : a) v = rng.index(k);
  return {k, one_hot(a, k), "random"};
}

Partition uniform_partition(std::size_t n, std::size_t k) {
  require_k(k);
  return {k, Eigen::MatrixXd::Constant(static_cast<Index>(k), static_cast<Index>(n), 1.0 / static_cast<double>(k)),
          "uniform"};
}

Partition kmeans_partition(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& options) {
  require_points(data, k);
  const KMeansResult km = kmeans(data, k, seed, options);
  return {k, one_hot(km.assignments, k), "kmeans"};
}

Eigen::MatrixXd GaussianMixture::responsibilities(const Eigen::MatrixXd& data) const {
  if (data.rows() != means.rows()) throw DataError("gmm: data dimension does not match the model");
  Eigen::MatrixXd r = weighted_log_densities(*this, data);
  normalize_posteriors(r);
  return r;
}

double GaussianMixture::log_likelihood(const Eigen::MatrixXd& data) const {
  Eigen::MatrixXd r = weighted_log_densities(*this, data);
  return normalize_posteriors(r);
}

GaussianMixture fit_gmm(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                        const GmmOptions& options) {
  require_points(data, k);
  if (!data.allFinite()) throw DataError("gmm: non-finite input");
  const Index d = data.rows();
  const Index n = data.cols();
  const auto kk = static_cast<Index>(k);

  const Eigen::VectorXd mean = data.rowwise().mean();
  const Eigen::VectorXd data_var = (data.colwise() - mean).array().square().rowwise().mean();
  const Eigen::VectorXd floor = 1e-6 * (data_var.array() + 1e-12);

  GaussianMixture g;
  {
    const KMeansResult km = kmeans(data, k, seed, options.init);
    g.weights = Eigen::VectorXd::Zero(kk);
    g.means = km.centroids;
    g.variances = Eigen::MatrixXd::Zero(d, kk);
    for (Index i = 0; i < n; ++i) {
      const auto c = static_cast<Index>(km.assignments[static_cast<std::size_t>(i)]);
      g.weights(c) += 1.0;
      g.variances.col(c).array() += (data.col(i) - g.means.col(c)).array().square();
    }
    for (Index c = 0; c < kk; ++c) {
      if (g.weights(c) > 0.0) g.variances.col(c) /= g.weights(c);
      g.variances.col(c) = g.variances.col(c).cwiseMax(floor);
    }
    g.weights /= static_cast<double>(n);
  }

  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    // E-step
    Eigen::MatrixXd resp = weighted_log_densities(g, data);
    const double ll = normalize_posteriors(resp);
    g.log_likelihood_trace.push_back(ll);
    ++g.iterations;
    if (std::isfinite(previous) && (ll - previous) <= options.tol * static_cast<double>(n)) {
      g.converged = true;
      break;
    }
    previous = ll;

    // M-step; a component with no mass keeps its parameters and zero weight
    const Eigen::VectorXd mass = resp.rowwise().sum();
    for (Index c = 0; c < kk; ++c) {
      g.weights(c) = mass(c) / static_cast<double>(n);
      if (!(mass(c) > 1e-300)) continue;
      g.means.col(c) = data * resp.row(c).transpose() / mass(c);
      Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
      for (Index i = 0; i < n; ++i)
        var.array() += resp(c, i) * (data.col(i) - g.means.col(c)).array().square();
      g.variances.col(c) = (var / mass(c)).cwiseMax(floor);
    }
  }
  return g;
}

Partition gmm_fit(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                  const GmmOptions& options) {
  const GaussianMixture g = fit_gmm(data, k, seed, options);
  return {k, g.responsibilities(data), "gmm"};
}

void save_partition(const std::string& path, const Partition& partition,
                    const std::vector<std::string>& sample_ids, Metadata meta) {
  meta.set("kind", "partition");
  meta.set("method", partition.method);
  meta.set("k", std::to_string(partition.k));
  save_matrix(path, {partition.loadings, sample_ids}, meta);
}

Partition load_partition(const std::string& path, std::vector<std::string>* sample_ids, Metadata* meta) {
  Metadata local;
  LabeledMatrix m = load_matrix(path, &local);
  Partition p;
  p.k = static_cast<std::size_t>(m.values.rows());
  p.loadings = std::move(m.values);
  p.method = local.get("method").value_or("unknown");
  if (sample_ids) *sample_ids = std::move(m.column_ids);
  if (meta) *meta = std::move(local);
  return p;
}

}  // namespace msbop
