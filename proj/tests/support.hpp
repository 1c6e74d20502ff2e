#ifndef MSBOP_TESTS_SUPPORT_HPP
#define MSBOP_TESTS_SUPPORT_HPP

// Test fixtures and brute-force oracles. Nothing here calls into the
// library's solvers; the oracles are the reference the library is held to.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "msbop/random.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("msbop_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Runs a shell command, returning its exit status; stderr goes to `err`
// when given.
inline int run_command(const std::string& command, const std::string& err = "") {
  const std::string full = command + (err.empty() ? " 2>/dev/null" : " 2>" + err);
  const int status = std::system(full.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Uniform [lo, hi) entries from a seeded stream.
inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, msbop::Rng& rng, double lo = 0.0,
                                     double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

// Exhaustive active-set NNLS: unconstrained least squares on every subset of
// coordinates, keeping the best feasible solution.
inline double nnls_enumeration_objective(const Eigen::MatrixXd& F, const Eigen::VectorXd& s,
                                         Eigen::VectorXd* best_x = nullptr) {
  const int k = static_cast<int>(F.cols());
  double best = s.squaredNorm();  // empty support
  Eigen::VectorXd bx = Eigen::VectorXd::Zero(k);
  for (int mask = 1; mask < (1 << k); ++mask) {
    std::vector<int> support;
    for (int j = 0; j < k; ++j)
      if (mask & (1 << j)) support.push_back(j);
    Eigen::MatrixXd sub(F.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t c = 0; c < support.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = F.col(support[c]);
    const Eigen::VectorXd y = sub.completeOrthogonalDecomposition().solve(s);
    if ((y.array() < 0.0).any()) continue;
    const double obj = (sub * y - s).squaredNorm();
    if (obj < best) {
      best = obj;
      bx.setZero();
      for (std::size_t c = 0; c < support.size(); ++c) bx(support[c]) = y(static_cast<Eigen::Index>(c));
    }
  }
  if (best_x) *best_x = bx;
  return best;
}

// Smallest within-cluster sum of squares over every split of the columns
// into two non-empty groups.
inline double best_two_partition_inertia(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.cols());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(points.rows());
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1) == side) {
          mean += points.col(i);
          ++count;
        }
      mean /= count;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1) == side) total += (points.col(i) - mean).squaredNorm();
    }
    best = std::min(best, total);
  }
  return best;
}

// Best rank-1 fit u v' of S by alternating scalar least-squares updates run
// to a fixed point; returns ||u v' - S||_F^2.
inline double rank_one_objective(const Eigen::MatrixXd& S) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(S.cols());
  Eigen::VectorXd u(S.rows());
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100000; ++iter) {
    u = S * v / v.squaredNorm();
    v = S.transpose() * u / u.squaredNorm();
    const double obj = (u * v.transpose() - S).squaredNorm();
    if (std::abs(previous - obj) <= 1e-15 * (1.0 + obj)) return obj;
    previous = obj;
  }
  return previous;
}

inline std::size_t brute_nearest(const Eigen::VectorXd& x, const Eigen::MatrixXd& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) d += (x(i) - centroids(i, c)) * (x(i) - centroids(i, c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

}  // namespace testing

#endif
