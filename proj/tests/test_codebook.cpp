#include <doctest.h>

#include <set>
#include <sstream>

#include "msbop/codebook.hpp"
#include "msbop/error.hpp"
#include "msbop/synthetic.hpp"
#include "support.hpp"

using namespace msbop;

namespace {

Eigen::MatrixXd two_clusters(std::uint64_t seed, Eigen::Vector2d* mean_a, Eigen::Vector2d* mean_b) {
  Rng rng(seed);
  Eigen::MatrixXd pts(2, 100);
  for (int i = 0; i < 100; ++i) {
    const double cx = i < 50 ? 0.0 : 10.0;
    pts(0, i) = cx + rng.uniform(-0.5, 0.5);
    pts(1, i) = cx + rng.uniform(-0.5, 0.5);
  }
  *mean_a = pts.leftCols(50).rowwise().mean();
  *mean_b = pts.rightCols(50).rowwise().mean();
  return pts;
}

}  // namespace

TEST_CASE("kmeans finds two tight clusters") {
  Eigen::Vector2d ma, mb;
  const Eigen::MatrixXd pts = two_clusters(5, &ma, &mb);
  const KMeansResult r = kmeans(pts, 2, 17);
  const Eigen::Vector2d c0 = r.centroids.col(0), c1 = r.centroids.col(1);
  const double d_direct = std::max((c0 - ma).norm(), (c1 - mb).norm());
  const double d_swapped = std::max((c0 - mb).norm(), (c1 - ma).norm());
  CHECK(std::min(d_direct, d_swapped) < 0.5);
  CHECK(r.converged);
  for (int i = 0; i < 100; ++i)
    CHECK(r.assignments[static_cast<std::size_t>(i)] == testing::brute_nearest(pts.col(i), r.centroids));
}

TEST_CASE("kmeans degenerate inputs") {
  Rng rng(3);
  const Eigen::MatrixXd pts = testing::random_matrix(3, 12, rng);

  SUBCASE("k equal to the number of points") {
    const KMeansResult r = kmeans(pts, 12, 1);
    CHECK(r.inertia == doctest::Approx(0.0));
    std::set<std::size_t> used(r.assignments.begin(), r.assignments.end());
    CHECK(used.size() == 12);
  }
  SUBCASE("identical points") {
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(2, 10, 4.0);
    const KMeansResult r = kmeans(same, 2, 1);
    CHECK(r.inertia == 0.0);
    std::set<std::size_t> used(r.assignments.begin(), r.assignments.end());
    CHECK(used.size() == 1);
    CHECK(r.centroids.allFinite());
  }
  CHECK_THROWS_AS(kmeans(pts, 0, 1), ConfigError);
  CHECK_THROWS_AS(kmeans(pts, 13, 1), InsufficientDataError);
}

TEST_CASE("kmeans inertia never increases") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd pts = testing::random_matrix(4, 200, rng);
    const KMeansResult r = kmeans(pts, 7, static_cast<std::uint64_t>(trial));
    REQUIRE(!r.inertia_trace.empty());
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] + 1e-9);
  }
}

TEST_CASE("kmeans with restarts matches exhaustive 2-partition search") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(7));  // 2..8 points
    const auto d = static_cast<Eigen::Index>(1 + rng.index(2));
    const Eigen::MatrixXd pts = testing::random_matrix(d, n, rng, -1.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < 10; ++s) best = std::min(best, kmeans(pts, 2, s, {300, 0.0}).inertia);
    CHECK(std::abs(best - testing::best_two_partition_inertia(pts)) <= 1e-9);
  }
}

TEST_CASE("kmeans is deterministic and worker-count independent") {
  Rng rng(2);
  const Eigen::MatrixXd pts = testing::random_matrix(5, 400, rng);
  const KMeansResult a = kmeans(pts, 9, 44);
  const KMeansResult b = kmeans(pts, 9, 44);
  CHECK(a.centroids == b.centroids);
  CHECK(a.assignments == b.assignments);
}

TEST_CASE("nearest_word") {
  Codebook cb{2, Eigen::MatrixXd(2, 5)};
  cb.centroids << 0, 1, 2, 3, 4,  //
      0, 0, 0, 0, 0;
  CHECK(nearest_word({2, Eigen::Vector2d(3, 0)}, cb) == 3);
  CHECK(nearest_word({2, Eigen::Vector2d(2.5, 0)}, cb) == 2);  // tie 2/3 -> 2

  Codebook tie{1, Eigen::MatrixXd(2, 5)};
  tie.centroids << 9, 1, 9, 9, -1,  //
      9, 0, 9, 9, 0;
  CHECK(nearest_word({1, Eigen::Vector2d(0, 0)}, tie) == 1);  // 1 and 4 equidistant

  Codebook single{1, Eigen::MatrixXd::Constant(2, 1, 7.0)};
  CHECK(nearest_word({1, Eigen::Vector2d(-5, 3)}, single) == 0);

  CHECK_THROWS_AS(nearest_word({1, Eigen::Vector3d(0, 0, 0)}, cb), DataError);

  SUBCASE("permuting words permutes the answer") {
    Rng rng(4);
    Codebook c{1, testing::random_matrix(3, 8, rng)};
    std::vector<Eigen::Index> perm{5, 2, 7, 0, 1, 3, 6, 4};
    Codebook p{1, Eigen::MatrixXd(3, 8)};
    for (Eigen::Index j = 0; j < 8; ++j) p.centroids.col(j) = c.centroids.col(perm[static_cast<std::size_t>(j)]);
    for (int t = 0; t < 100; ++t) {
      const Patch q{1, testing::random_matrix(3, 1, rng).col(0)};
      CHECK(perm[nearest_word(q, p)] == static_cast<Eigen::Index>(nearest_word(q, c)));
    }
  }
}

TEST_CASE("generate_codebooks") {
  SynthConfig cfg;
  cfg.pures_per_archetype = 34;
  cfg.mixtures = 0;
  auto signals = generate_dataset(cfg, 1);
  signals.erase(signals.begin() + 100, signals.end());
  CodebookOptions opts;
  opts.sampling = 0.05;
  const auto books = generate_codebooks(signals, opts, 5);
  REQUIRE(books.size() == 3);
  const std::size_t dims[] = {12, 24, 48};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(books[i].scale == opts.scales[i]);
    CHECK(books[i].size() == 25);
    CHECK(books[i].dim() == dims[i]);
  }

  SUBCASE("sampled runs repeat exactly") {
    const auto again = generate_codebooks(signals, opts, 5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(again[i].centroids == books[i].centroids);
  }
  SUBCASE("sampling 1 equals no sampling") {
    std::vector<Signal> few(signals.begin(), signals.begin() + 10);
    CodebookOptions full;
    full.sizes = {5, 5, 5};
    CodebookOptions one = full;
    one.sampling = 1.0;
    const auto a = generate_codebooks(few, full, 3);
    const auto b = generate_codebooks(few, one, 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i].centroids == b[i].centroids);
  }
  SUBCASE("a scale longer than every signal") {
    CodebookOptions big;
    big.scales = {4, 500};
    big.sizes = {3, 3};
    std::vector<Signal> few(signals.begin(), signals.begin() + 3);
    CHECK_THROWS_AS(generate_codebooks(few, big, 1), InsufficientDataError);
  }
  SUBCASE("invalid options") {
    CodebookOptions bad;
    bad.sizes = {25, 25};
    CHECK_THROWS_AS(generate_codebooks(signals, bad, 1), ConfigError);
    bad = {};
    bad.scales = {8, 4, 16};
    CHECK_THROWS_AS(generate_codebooks(signals, bad, 1), ConfigError);
    bad = {};
    bad.sampling = 0.0;
    CHECK_THROWS_AS(generate_codebooks(signals, bad, 1), ConfigError);
  }
}

TEST_CASE("codebook text round trip keeps nearest words") {
  Rng rng(12);
  Codebook cb{4, testing::random_matrix(12, 25, rng, -2.0, 2.0)};
  cb.centroids(0, 0) = 1.0 / 3.0;
  std::stringstream s;
  write_codebook(s, cb, {"config_hash=abc"});
  const std::string text = s.str();
  CHECK(text.find("scale=4 k=25 dim=12") != std::string::npos);
  CHECK(text.find("0.333333333 ") != std::string::npos);  // 9 significant digits
  const Codebook back = read_codebook(s);
  CHECK(back.scale == 4);
  CHECK(back.size() == 25);
  for (int t = 0; t < 500; ++t) {
    const Patch p{4, testing::random_matrix(12, 1, rng, -2.0, 2.0).col(0)};
    CHECK(nearest_word(p, back) == nearest_word(p, cb));
  }
  // words stay in their order
  for (Eigen::Index j = 0; j < 25; ++j) CHECK(nearest_word({4, back.centroids.col(j)}, cb) == static_cast<std::size_t>(j));

  std::stringstream bad("scale=4 k=2 dim=3\n1 2 3\n4 5\n");
  CHECK_THROWS_AS(read_codebook(bad), DataError);
}
