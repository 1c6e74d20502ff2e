#include <doctest.h>

#include "msbop/codebook.hpp"
#include "msbop/error.hpp"
#include "msbop/factorize.hpp"
#include "msbop/features.hpp"
#include "msbop/nnls.hpp"
#include "msbop/synthetic.hpp"
#include "support.hpp"

using namespace msbop;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double q_value(const MatrixXd& G, const VectorXd& h, const VectorXd& x) { return 0.5 * x.dot(G * x) - h.dot(x); }

AnlsOptions tight() {
  AnlsOptions o;
  o.tol = 1e-12;
  o.max_iter = 5000;
  o.inner.tol = 1e-10;
  o.inner.max_iter = 500;
  return o;
}

}  // namespace

TEST_CASE("nnls closed cases") {
  Rng rng(1);
  const VectorXd s = testing::random_matrix(5, 1, rng).col(0);
  CHECK((nnls_solve(MatrixXd::Identity(5, 5), s) - s).cwiseAbs().maxCoeff() <= 1e-9);

  MatrixXd F = MatrixXd::Zero(4, 3);
  F(0, 0) = 1.0;
  F(1, 1) = 2.0;
  F(2, 1) = 1.0;
  F(3, 2) = 0.5;
  const VectorXd x = nnls_solve(F, 3.0 * F.col(1));
  CHECK((x - VectorXd::Unit(3, 1) * 3.0).cwiseAbs().maxCoeff() <= 1e-9);

  F.col(2).setZero();
  CHECK_THROWS_AS(nnls_solve(F, s.head(4)), NumericalError);
}

TEST_CASE("nnls agrees with active-set enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = static_cast<Eigen::Index>(1 + rng.index(6));
    const auto k = static_cast<Eigen::Index>(1 + rng.index(5));
    const MatrixXd F = testing::random_matrix(p, k, rng);
    const VectorXd s = testing::random_matrix(p, 1, rng, -0.5, 1.0).col(0);
    const VectorXd x = nnls_solve(F, s);
    CHECK(x.minCoeff() >= 0.0);
    const double got = (F * x - s).squaredNorm();
    const double want = testing::nnls_enumeration_objective(F, s);
    CHECK(std::abs(got - want) <= 1e-6);
  }
}

TEST_CASE("nnls never increases the objective from a warm start") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd A = testing::random_matrix(8, 4, rng);
    const MatrixXd G = A.transpose() * A;
    const VectorXd h = A.transpose() * testing::random_matrix(8, 1, rng, -1.0, 1.0).col(0);
    const VectorXd x0 = testing::random_matrix(4, 1, rng).col(0);
    NnlsOptions o;
    o.max_iter = 1 + rng.index(5);
    const NnlsResult r = nnls_gram(G, h, x0, o);
    CHECK(r.x.minCoeff() >= 0.0);
    CHECK(q_value(G, h, r.x) <= q_value(G, h, x0) + 1e-12);
  }
}

TEST_CASE("anls recovers an exact low-rank product") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd S = testing::random_matrix(6, 2, rng) * testing::random_matrix(2, 8, rng);
    AnlsOptions o;
    o.restarts = 10;
    const FactorModel m = anls_fit(S, 2, static_cast<std::uint64_t>(trial), o);
    CHECK(m.objective <= 1e-6 * S.squaredNorm());
  }
}

TEST_CASE("anls with k=1 matches the rank-one oracle") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd S = testing::random_matrix(7, 12, rng);
    const FactorModel m = anls_fit(S, 1, static_cast<std::uint64_t>(trial), tight());
    CHECK(std::abs(m.objective - testing::rank_one_objective(S)) <= 1e-6);
  }
}

TEST_CASE("anls trace, non-negativity and reporting") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd S = testing::random_matrix(15, 30, rng);
    const FactorModel m = anls_fit(S, 4, static_cast<std::uint64_t>(trial));
    REQUIRE(m.objective_trace.size() == m.iterations + 1);
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
      CHECK(m.objective_trace[i] <= m.objective_trace[i - 1] + 1e-9);
    CHECK(m.factors.minCoeff() >= 0.0);
    CHECK(m.loadings.minCoeff() >= 0.0);
    // columns of F sum to one and normalizing did not move FA
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(m.factors.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m.objective - m.objective_trace.back()) <= 1e-12 * std::max(1.0, m.objective));
    CHECK(m.objective == doctest::Approx(factor_objective(m.factors, m.loadings, S)).epsilon(1e-14));
  }
}

TEST_CASE("anls is deterministic and validates its input") {
  Rng rng(7);
  const MatrixXd S = testing::random_matrix(10, 20, rng);
  const FactorModel a = anls_fit(S, 3, 99);
  const FactorModel b = anls_fit(S, 3, 99);
  CHECK(a.factors == b.factors);
  CHECK(a.loadings == b.loadings);
  CHECK(a.objective_trace == b.objective_trace);

  CHECK_THROWS_AS(anls_fit(S, 11, 1), ConfigError);
  CHECK_THROWS_AS(anls_fit(S, 0, 1), ConfigError);
  MatrixXd bad = S;
  bad(2, 3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(anls_fit(bad, 3, 1), DataError);
  AnlsOptions o;
  o.restarts = 0;
  CHECK_THROWS_AS(anls_fit(S, 3, 1, o), ConfigError);
}

TEST_CASE("permuted factors keep the objective") {
  Rng rng(8);
  const MatrixXd S = testing::random_matrix(12, 25, rng);
  const FactorModel m = anls_fit(S, 4, 1);
  const std::vector<std::vector<std::size_t>> perms{{1, 0, 2, 3}, {3, 2, 1, 0}, {2, 3, 0, 1}};
  for (const auto& perm : perms) {
    const FactorModel q = permute_factors(m, perm);
    CHECK(std::abs(factor_objective(q.factors, q.loadings, S) - factor_objective(m.factors, m.loadings, S)) <= 1e-12);
    CHECK(q.factors.col(0) == m.factors.col(static_cast<Eigen::Index>(perm[0])));
  }
  CHECK_THROWS_AS(permute_factors(m, {0, 0, 1, 2}), ConfigError);
}

TEST_CASE("loadings_for") {
  Rng rng(10);
  const MatrixXd F = testing::random_matrix(6, 3, rng);
  const MatrixXd e = loadings_for(F, F.col(1));
  CHECK((e.col(0) - VectorXd::Unit(3, 1)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(loadings_for(F, MatrixXd(6, 0)).cols() == 0);

  const MatrixXd S = testing::random_matrix(6, 10, rng);
  const MatrixXd A = loadings_for(F, S);
  MatrixXd reversed(6, 10);
  for (Eigen::Index j = 0; j < 10; ++j) reversed.col(j) = S.col(9 - j);
  const MatrixXd B = loadings_for(F, reversed);
  for (Eigen::Index j = 0; j < 10; ++j) CHECK(A.col(j) == B.col(9 - j));

  SUBCASE("reproduces the loadings of a converged fit") {
    const MatrixXd T = testing::random_matrix(8, 2, rng) * testing::random_matrix(2, 15, rng) + 0.05 * testing::random_matrix(8, 15, rng);
    const FactorModel m = anls_fit(T, 2, 3, tight());
    REQUIRE(m.converged);
    CHECK((loadings_for(m.factors, T, tight().inner) - m.loadings).cwiseAbs().maxCoeff() <= 1e-6);
  }
  CHECK_THROWS_AS(loadings_for(F, MatrixXd::Ones(5, 2)), DataError);
}

TEST_CASE("semi-supervised reductions") {
  Rng rng(11);
  const MatrixXd S = testing::random_matrix(9, 20, rng);
  const MatrixXd F = testing::random_matrix(9, 3, rng);
  std::map<std::size_t, VectorXd> all{{0, F.col(0)}, {1, F.col(1)}, {2, F.col(2)}};
  const FactorModel full = semi_supervised_fit(S, 3, all, 1);
  CHECK(full.factors == F);
  CHECK((full.loadings - loadings_for(F, S)).cwiseAbs().maxCoeff() <= 1e-12);

  const FactorModel none = semi_supervised_fit(S, 3, {}, 5);
  const FactorModel plain = anls_fit(S, 3, 5);
  CHECK(none.factors == plain.factors);
  CHECK(none.loadings == plain.loadings);

  const FactorModel partial = semi_supervised_fit(S, 3, {{1, F.col(1)}}, 2);
  CHECK(partial.factors.col(1) == F.col(1));
  for (std::size_t i = 1; i < partial.objective_trace.size(); ++i)
    CHECK(partial.objective_trace[i] <= partial.objective_trace[i - 1] + 1e-9);

  CHECK_THROWS_AS(semi_supervised_fit(S, 3, {{3, F.col(0)}}, 1), ConfigError);
  CHECK_THROWS_AS(semi_supervised_fit(S, 3, {{0, -F.col(0)}}, 1), ConfigError);
}

TEST_CASE("fixed archetype descriptors recover mixture proportions") {
  SynthConfig cfg;
  cfg.pures_per_archetype = 40;
  cfg.mixtures = 30;
  cfg.mixture_shares = {0.5};
  const auto signals = generate_dataset(cfg, 12);
  CodebookOptions copts;
  copts.sampling = 0.2;
  const auto books = generate_codebooks(signals, copts, 12);
  const FeatureMatrix fm = build_feature_matrix(signals, books, true).features;

  const std::vector<std::string> names{"impulsive", "periodic", "still"};
  std::map<std::size_t, VectorXd> fixed;
  for (std::size_t j = 0; j < names.size(); ++j) {
    VectorXd mean = VectorXd::Zero(fm.values.rows());
    int count = 0;
    for (std::size_t c = 0; c < signals.size(); ++c)
      if (signals[c].id().rfind("pure_" + names[j], 0) == 0) {
        mean += fm.values.col(static_cast<Eigen::Index>(c));
        ++count;
      }
    fixed[j] = mean / count;
  }
  const FactorModel m = semi_supervised_fit(fm.values, 3, fixed, 1);
  double error = 0.0;
  int count = 0;
  for (std::size_t c = 0; c < signals.size(); ++c) {
    if (signals[c].id().rfind("mix_", 0) != 0) continue;
    const VectorXd a = m.loadings.col(static_cast<Eigen::Index>(c)) / m.loadings.col(static_cast<Eigen::Index>(c)).sum();
    for (std::size_t j = 0; j < 3; ++j) {
      const auto& mix = *signals[c].true_mix();
      const double truth = mix.count(names[j]) ? mix.at(names[j]) : 0.0;
      error += std::abs(a(static_cast<Eigen::Index>(j)) - truth);
      ++count;
    }
  }
  CHECK(error / count <= 0.05);
}

TEST_CASE("sample_then_fit") {
  Rng rng(13);
  const MatrixXd S = testing::random_matrix(20, 3, rng) * testing::random_matrix(3, 200, rng) +
                     0.05 * testing::random_matrix(20, 200, rng);

  const FactorModel whole = sample_then_fit(S, 3, 1.0, 4);
  const FactorModel plain = anls_fit(S, 3, 4);
  CHECK(whole.factors == plain.factors);
  CHECK((whole.loadings - loadings_for(plain.factors, S)).cwiseAbs().maxCoeff() <= 1e-6);

  const FactorModel half = sample_then_fit(S, 3, 0.5, 4);
  CHECK(half.loadings.cols() == 200);
  CHECK(half.objective <= 1.10 * plain.objective);

  CHECK_THROWS_AS(sample_then_fit(S.leftCols(2), 2, 0.5, 1), InsufficientDataError);
  CHECK_THROWS_AS(sample_then_fit(S, 3, 0.0, 1), ConfigError);
}

TEST_CASE("multi-sensor fit is the stacked fit") {
  Rng rng(14);
  std::vector<FeatureMatrix> sensors;
  std::vector<MatrixXd> blocks;
  for (Eigen::Index p : {5, 7, 4}) {
    FeatureMatrix f{testing::random_matrix(p, 30, rng), {}, {{4, 0, static_cast<std::size_t>(p)}}};
    for (int i = 0; i < 30; ++i) f.ids.push_back("c" + std::to_string(i));
    blocks.push_back(f.values);
    sensors.push_back(std::move(f));
  }
  const MultiSensorFit fit = fit_multi_sensor(sensors, 3, 8);
  const FactorModel stacked = anls_fit(stack_multi_sensor(sensors).values, 3, 8);
  CHECK(fit.model.factors == stacked.factors);
  REQUIRE(fit.sensor_factors.size() == 3);
  const double per_sensor = multi_sensor_objective(fit.sensor_factors, fit.model.loadings, blocks);
  CHECK(std::abs(per_sensor - stacked.objective / 3.0) <= 1e-9);
}

TEST_CASE("model file round trip") {
  testing::TempDir dir;
  Rng rng(15);
  const MatrixXd S = testing::random_matrix(6, 9, rng);
  const FactorModel m = anls_fit(S, 2, 3);
  std::vector<std::string> ids;
  for (int i = 0; i < 9; ++i) ids.push_back("x" + std::to_string(i));
  Metadata meta;
  meta.set("config_hash", "0123");
  save_model(dir.file("m.txt"), m, ids, meta);
  std::vector<std::string> back_ids;
  Metadata back_meta;
  const FactorModel back = load_model(dir.file("m.txt"), &back_ids, &back_meta);
  CHECK(back_ids == ids);
  CHECK(back.k == 2);
  CHECK(back.seed == 3);
  CHECK(back_meta.get("config_hash") == std::optional<std::string>("0123"));
  CHECK(back_meta.get("final_objective").has_value());
  CHECK((back.factors - m.factors).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((back.loadings - m.loadings).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, m.loadings.maxCoeff()));
}
