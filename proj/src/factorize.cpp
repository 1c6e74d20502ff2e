#include "msbop/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "msbop/error.hpp"
#include "msbop/parallel.hpp"
#include "msbop/random.hpp"
#include "msbop/text.hpp"

namespace msbop {

namespace {

using Index = Eigen::Index;

void check_data(const Eigen::MatrixXd& data, std::size_t k) {
  if (k == 0) throw ConfigError("factorize: k must be positive");
  const auto limit = static_cast<std::size_t>(std::min(data.rows(), data.cols()));
  if (k > limit)
    throw ConfigError("factorize: k=" + std::to_string(k) + " exceeds min(p, N)=" + std::to_string(limit));
  if (!data.allFinite()) throw DataError("factorize: non-finite entries in the data matrix");
}

void check_options(const AnlsOptions& o) {
  if (o.restarts == 0) throw ConfigError("factorize: restarts must be at least 1");
  if (o.max_iter == 0) throw ConfigError("factorize: max_iter must be at least 1");
  if (!(o.tol >= 0.0)) throw ConfigError("factorize: tol must be non-negative");
}

// F rows: each row r of F solves min ||A' f_r - S_r'|| over the free columns,
// with the pinned columns moved into the target.
void update_factors(const Eigen::MatrixXd& data, const Eigen::MatrixXd& loadings,
                    const std::vector<bool>& pinned, const NnlsOptions& inner, Eigen::MatrixXd& factors) {
  const Eigen::MatrixXd gram = loadings * loadings.transpose();
  const Eigen::MatrixXd cross = loadings * data.transpose();  // k x p
  std::vector<Index> free_idx, pinned_idx;
  for (std::size_t j = 0; j < pinned.size(); ++j)
    (pinned[j] ? pinned_idx : free_idx).push_back(static_cast<Index>(j));
  if (free_idx.empty()) return;
  const auto nf = static_cast<Index>(free_idx.size());

  Eigen::MatrixXd g_ff(nf, nf);
  for (Index a = 0; a < nf; ++a)
    for (Index b = 0; b < nf; ++b) g_ff(a, b) = gram(free_idx[a], free_idx[b]);

  parallel_for(static_cast<std::size_t>(factors.rows()), [&](std::size_t row) {
    const auto r = static_cast<Index>(row);
    Eigen::VectorXd h(nf), x0(nf);
    for (Index a = 0; a < nf; ++a) {
      double v = cross(free_idx[a], r);
      for (Index q : pinned_idx) v -= gram(free_idx[a], q) * factors(r, q);
      h(a) = v;
      x0(a) = factors(r, free_idx[a]);
    }
    const Eigen::VectorXd x = nnls_gram(g_ff, h, x0, inner).x;
    for (Index a = 0; a < nf; ++a) factors(r, free_idx[a]) = x(a);
  });
}

void update_loadings(const Eigen::MatrixXd& data, const Eigen::MatrixXd& factors,
                     const NnlsOptions& inner, Eigen::MatrixXd& loadings) {
  const Eigen::MatrixXd gram = factors.transpose() * factors;
  const Eigen::MatrixXd cross = factors.transpose() * data;  // k x N
  parallel_for(static_cast<std::size_t>(loadings.cols()), [&](std::size_t col) {
    const auto c = static_cast<Index>(col);
    loadings.col(c) = nnls_gram(gram, cross.col(c), loadings.col(c), inner).x;
  });
}

// Free columns to unit L1 norm, inverse scale into the matching row of A.
void normalize_columns(FactorModel& model, const std::vector<bool>& pinned) {
  for (Index j = 0; j < model.factors.cols(); ++j) {
    if (pinned[static_cast<std::size_t>(j)]) continue;
    const double norm = model.factors.col(j).sum();
    if (!(norm > 0.0)) continue;
    model.factors.col(j) /= norm;
    model.loadings.row(j) *= norm;
  }
}

FactorModel fit_once(const Eigen::MatrixXd& data, std::size_t k,
                     const std::map<std::size_t, Eigen::VectorXd>& fixed, std::uint64_t seed,
                     const AnlsOptions& options) {
  const Index p = data.rows(), n = data.cols();
  const double mean = data.size() ? data.mean() : 0.0;
  // E[(FA)_ij] = k * scale^2 / 4 with scale^2 = mean; the start sits on the data's scale
  const double scale = mean > 0.0 ? std::sqrt(mean) : 1.0;

  Rng rng(seed);
  FactorModel m;
  m.seed = seed;
  m.k = k;
  m.factors.resize(p, static_cast<Index>(k));
  m.loadings.resize(static_cast<Index>(k), n);
  for (Index j = 0; j < m.factors.cols(); ++j)
    for (Index i = 0; i < p; ++i) m.factors(i, j) = scale * rng.uniform();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m.loadings.rows(); ++i) m.loadings(i, j) = scale * rng.uniform();

  std::vector<bool> pinned(k, false);
  for (const auto& [j, column] : fixed) {
    m.factors.col(static_cast<Index>(j)) = column;
    pinned[j] = true;
  }

  double previous = factor_objective(m.factors, m.loadings, data);
  m.objective_trace.push_back(previous);
  while (m.iterations < options.max_iter) {
    update_factors(data, m.loadings, pinned, options.inner, m.factors);
    update_loadings(data, m.factors, options.inner, m.loadings);
    ++m.iterations;
    const double current = factor_objective(m.factors, m.loadings, data);
    if (!std::isfinite(current)) throw NumericalError("factorize: objective became non-finite");
    m.objective_trace.push_back(current);
    if (previous <= 0.0 || (previous - current) / previous < options.tol) {
      m.converged = true;
      break;
    }
    previous = current;
  }
  normalize_columns(m, pinned);
  m.objective = factor_objective(m.factors, m.loadings, data);
  return m;
}

FactorModel fit_best(const Eigen::MatrixXd& data, std::size_t k,
                     const std::map<std::size_t, Eigen::VectorXd>& fixed, std::uint64_t seed,
                     const AnlsOptions& options) {
  check_data(data, k);
  check_options(options);
  FactorModel best;
  double best_objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < options.restarts; ++r) {
    FactorModel m = fit_once(data, k, fixed, derive_seed(seed, r), options);
    if (m.objective < best_objective) {
      best_objective = m.objective;
      best = std::move(m);
    }
  }
  best.seed = seed;
  return best;
}

}  // namespace

double factor_objective(const Eigen::MatrixXd& factors, const Eigen::MatrixXd& loadings,
                        const Eigen::MatrixXd& data) {
  return (factors * loadings - data).squaredNorm();
}

FactorModel anls_fit(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                     const AnlsOptions& options) {
  return fit_best(data, k, {}, seed, options);
}

Eigen::MatrixXd loadings_for(const Eigen::MatrixXd& factors, const Eigen::MatrixXd& data,
                             const NnlsOptions& options) {
  if (factors.rows() != data.rows())
    throw DataError("loadings: factor matrix has " + std::to_string(factors.rows()) +
                    " rows, data has " + std::to_string(data.rows()));
  for (Index j = 0; j < factors.cols(); ++j)
    if ((factors.col(j).array() == 0.0).all())
      throw NumericalError("loadings: degenerate factor, column " + std::to_string(j) + " is all zero");
  if (!data.allFinite()) throw DataError("loadings: non-finite entries in the data matrix");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(factors.cols(), data.cols());
  update_loadings(data, factors, options, out);
  return out;
}

FactorModel semi_supervised_fit(const Eigen::MatrixXd& data, std::size_t k,
                                const std::map<std::size_t, Eigen::VectorXd>& fixed,
                                std::uint64_t seed, const AnlsOptions& options) {
  for (const auto& [j, column] : fixed) {
    if (j >= k) throw ConfigError("semi-supervised: fixed index " + std::to_string(j) + " >= k");
    if (column.size() != data.rows())
      throw ConfigError("semi-supervised: fixed column " + std::to_string(j) + " has dimension " +
                        std::to_string(column.size()) + ", expected " + std::to_string(data.rows()));
    if (!column.allFinite() || (column.array() < 0.0).any())
      throw ConfigError("semi-supervised: fixed column " + std::to_string(j) + " must be non-negative");
  }
  if (fixed.size() < k || k == 0) return fit_best(data, k, fixed, seed, options);

  // Every column pinned: only the convex loadings problem remains.
  check_data(data, k);
  FactorModel m;
  m.seed = seed;
  m.k = k;
  m.factors.resize(data.rows(), static_cast<Index>(k));
  for (const auto& [j, column] : fixed) m.factors.col(static_cast<Index>(j)) = column;
  m.loadings = loadings_for(m.factors, data, options.inner);
  m.objective = factor_objective(m.factors, m.loadings, data);
  m.objective_trace = {m.objective};
  m.converged = true;
  return m;
}

FactorModel sample_then_fit(const Eigen::MatrixXd& data, std::size_t k, double sample_fraction,
                            std::uint64_t seed, const AnlsOptions& options) {
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
    throw ConfigError("sample_then_fit: fraction must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(data.cols());
  FactorModel m;
  if (sample_fraction >= 1.0) {
    m = anls_fit(data, k, seed, options);
  } else {
    const auto keep = static_cast<std::size_t>(std::ceil(sample_fraction * static_cast<double>(n)));
    if (keep < k)
      throw InsufficientDataError("sample_then_fit: sample of " + std::to_string(keep) +
                                  " columns is smaller than k=" + std::to_string(k));
    Rng rng(derive_seed(seed, 0x5a3d1eULL));
    std::vector<std::size_t> cols = rng.sample_without_replacement(n, keep);
    std::sort(cols.begin(), cols.end());
    Eigen::MatrixXd sample(data.rows(), static_cast<Index>(keep));
    for (std::size_t j = 0; j < keep; ++j) sample.col(static_cast<Index>(j)) = data.col(static_cast<Index>(cols[j]));
    m = anls_fit(sample, k, seed, options);
  }
  m.loadings = loadings_for(m.factors, data, options.inner);
  m.objective = factor_objective(m.factors, m.loadings, data);
  return m;
}

FactorModel permute_factors(const FactorModel& model, const std::vector<std::size_t>& perm) {
  if (perm.size() != model.k) throw ConfigError("permute_factors: permutation has wrong length");
  std::vector<bool> seen(model.k, false);
  for (std::size_t j : perm) {
    if (j >= model.k || seen[j]) throw ConfigError("permute_factors: not a permutation");
    seen[j] = true;
  }
  FactorModel out = model;
  for (std::size_t j = 0; j < model.k; ++j) {
    out.factors.col(static_cast<Index>(j)) = model.factors.col(static_cast<Index>(perm[j]));
    out.loadings.row(static_cast<Index>(j)) = model.loadings.row(static_cast<Index>(perm[j]));
  }
  return out;
}

MultiSensorFit fit_multi_sensor(const std::vector<FeatureMatrix>& per_sensor, std::size_t k,
                                std::uint64_t seed, const AnlsOptions& options) {
  const FeatureMatrix stacked = stack_multi_sensor(per_sensor);
  MultiSensorFit out;
  out.model = anls_fit(stacked.values, k, seed, options);
  Index offset = 0;
  for (const auto& s : per_sensor) {
    out.sensor_factors.push_back(out.model.factors.middleRows(offset, s.values.rows()));
    offset += s.values.rows();
  }
  return out;
}

double multi_sensor_objective(const std::vector<Eigen::MatrixXd>& sensor_factors,
                              const Eigen::MatrixXd& loadings,
                              const std::vector<Eigen::MatrixXd>& sensor_data) {
  if (sensor_factors.size() != sensor_data.size() || sensor_data.empty())
    throw ConfigError("multi_sensor_objective: need one factor block per sensor");
  double total = 0.0;
  for (std::size_t i = 0; i < sensor_data.size(); ++i)
    total += factor_objective(sensor_factors[i], loadings, sensor_data[i]);
  return total / static_cast<double>(sensor_data.size());
}

void save_model(const std::string& path, const FactorModel& model,
                const std::vector<std::string>& sample_ids, Metadata meta) {
  meta.set("kind", "factor_model");
  meta.set("k", std::to_string(model.k));
  meta.set("seed", std::to_string(model.seed));
  meta.set("iterations", std::to_string(model.iterations));
  meta.set("converged", model.converged ? "true" : "false");
  meta.set("final_objective", format_real(model.objective));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_metadata(out, meta);
  std::vector<std::string> factor_ids;
  for (std::size_t j = 0; j < model.k; ++j) factor_ids.push_back("factor" + std::to_string(j));
  write_matrix_block(out, {model.factors, factor_ids});
  write_matrix_block(out, {model.loadings, sample_ids});
}

FactorModel load_model(const std::string& path, std::vector<std::string>* sample_ids, Metadata* meta) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  MatrixReader reader(in);
  auto f = reader.next_block();
  auto a = reader.next_block();
  if (!f || !a) throw DataError("model '" + path + "' needs a factor block and a loadings block");
  if (f->values.cols() != a->values.rows())
    throw DataError("model '" + path + "': factor and loadings blocks disagree on k");
  FactorModel m;
  m.factors = std::move(f->values);
  m.loadings = std::move(a->values);
  m.k = static_cast<std::size_t>(m.factors.cols());
  const Metadata& md = reader.metadata();
  if (auto s = md.get("seed")) m.seed = std::stoull(*s);
  if (auto s = md.get("iterations")) m.iterations = std::stoull(*s);
  if (auto s = md.get("converged")) m.converged = *s == "true";
  if (auto s = md.get("final_objective")) m.objective = parse_real(*s).value_or(0.0);
  if (sample_ids) *sample_ids = std::move(a->column_ids);
  if (meta) *meta = md;
  return m;
}

}  // namespace msbop
