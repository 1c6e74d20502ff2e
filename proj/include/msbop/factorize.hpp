#ifndef MSBOP_FACTORIZE_HPP
#define MSBOP_FACTORIZE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msbop/features.hpp"
#include "msbop/matrix_io.hpp"
#include "msbop/nnls.hpp"

namespace msbop {

// S ~ F A with F (p x k) holding one pure-mode descriptor per column and A
// (k x N) the per-sample loadings. Free columns of F are L1-normalized on
// return with the scale folded into A.
struct FactorModel {
  Eigen::MatrixXd factors;   // F
  Eigen::MatrixXd loadings;  // A
  std::vector<double> objective_trace;  // initial value, then one per outer iteration
  double objective = 0.0;               // ||FA - S||_F^2 of the returned pair
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct AnlsOptions {
  double tol = 1e-6;  // relative objective decrease
  std::size_t max_iter = 500;
  std::size_t restarts = 5;
  NnlsOptions inner;
};

double factor_objective(const Eigen::MatrixXd& factors, const Eigen::MatrixXd& loadings,
                        const Eigen::MatrixXd& data);

// Alternating non-negative least squares from a seeded random start, best of
// `restarts` runs. ConfigError if k > min(p, N); DataError on non-finite S.
FactorModel anls_fit(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                     const AnlsOptions& options = {});

// Columnwise NNLS against a fixed F.
Eigen::MatrixXd loadings_for(const Eigen::MatrixXd& factors, const Eigen::MatrixXd& data,
                             const NnlsOptions& options = {});

// ANLS with the listed columns of F pinned to the given vectors. With every
// column pinned this is exactly loadings_for; with none it is anls_fit.
FactorModel semi_supervised_fit(const Eigen::MatrixXd& data, std::size_t k,
                                const std::map<std::size_t, Eigen::VectorXd>& fixed,
                                std::uint64_t seed, const AnlsOptions& options = {});

// F from ANLS on a seeded uniform sample of ceil(fraction * N) columns, then
// loadings for every column.
FactorModel sample_then_fit(const Eigen::MatrixXd& data, std::size_t k, double sample_fraction,
                            std::uint64_t seed, const AnlsOptions& options = {});

// (F Q, Q' A) for the permutation matrix Q mapping factor perm[j] to slot j.
FactorModel permute_factors(const FactorModel& model, const std::vector<std::size_t>& perm);

// Separate factor blocks per sensor with shared loadings, fitted through the
// stacked single-sensor problem.
struct MultiSensorFit {
  FactorModel model;                          // on the stacked rows
  std::vector<Eigen::MatrixXd> sensor_factors;  // F^i, row blocks of model.factors
};

MultiSensorFit fit_multi_sensor(const std::vector<FeatureMatrix>& per_sensor, std::size_t k,
                                std::uint64_t seed, const AnlsOptions& options = {});

// (1/l) sum_i ||F^i A - S^i||_F^2
double multi_sensor_objective(const std::vector<Eigen::MatrixXd>& sensor_factors,
                              const Eigen::MatrixXd& loadings,
                              const std::vector<Eigen::MatrixXd>& sensor_data);

// Model file: metadata lines, then an F block (ids factor0..) and an A block
// (ids = sample ids).
void save_model(const std::string& path, const FactorModel& model,
                const std::vector<std::string>& sample_ids, Metadata meta = {});
FactorModel load_model(const std::string& path, std::vector<std::string>* sample_ids = nullptr,
                       Metadata* meta = nullptr);

}  // namespace msbop

#endif
