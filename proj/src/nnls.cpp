#include "msbop/nnls.hpp"

#include <cmath>
#include <vector>

#include "msbop/error.hpp"

namespace msbop {

namespace {

constexpr double kArmijoSigma = 0.01;
constexpr double kBacktrack = 0.1;
constexpr int kMaxStepChanges = 40;

double quadratic(const Eigen::MatrixXd& gram, const Eigen::VectorXd& h, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(gram * x) - h.dot(x);
}

// Exact minimizer of q on the face {x_i = 0 for i not in free}, moved to
// from x along the segment and stopped at the first bound it hits.
bool face_step(const Eigen::MatrixXd& gram, const Eigen::VectorXd& h, Eigen::VectorXd& x) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) > 0.0) free.push_back(i);
  if (free.empty()) return false;

  const auto n = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd g_ff(n, n);
  Eigen::VectorXd h_f(n), x_f(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    h_f(a) = h(free[static_cast<std::size_t>(a)]);
    x_f(a) = x(free[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < n; ++b)
      g_ff(a, b) = gram(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g_ff);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd target = ldlt.solve(h_f);
  if (!target.allFinite()) return false;

  const Eigen::VectorXd dir = target - x_f;
  double t = 1.0;
  Eigen::Index blocking = -1;
  for (Eigen::Index a = 0; a < n; ++a)
    if (dir(a) < 0.0) {
      const double limit = x_f(a) / -dir(a);
      if (limit < t) {
        t = limit;
        blocking = a;
      }
    }

  Eigen::VectorXd candidate = x;
  for (Eigen::Index a = 0; a < n; ++a)
    candidate(free[static_cast<std::size_t>(a)]) = std::max(0.0, x_f(a) + t * dir(a));
  if (blocking >= 0) candidate(free[static_cast<std::size_t>(blocking)]) = 0.0;

  if (quadratic(gram, h, candidate) > quadratic(gram, h, x)) return false;
  x = std::move(candidate);
  return true;
}

}  // namespace

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double g = x(i) > 0.0 ? gradient(i) : std::min(gradient(i), 0.0);
    sum += g * g;
  }
  return std::sqrt(sum);
}

NnlsResult nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& h, const Eigen::VectorXd& x0,
                     const NnlsOptions& options) {
  NnlsResult r;
  r.x = x0.cwiseMax(0.0);
  double step = 1.0;

  for (;;) {
    const Eigen::VectorXd grad = gram * r.x - h;
    r.projected_gradient_norm = projected_gradient_norm(r.x, grad);
    if (r.projected_gradient_norm <= options.tol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= options.max_iter) break;
    ++r.iterations;

    // Sufficient decrease for a quadratic: q(x+d) - q(x) = g'd + d'Gd/2 <= sigma g'd
    auto sufficient = [&](const Eigen::VectorXd& next) {
      const Eigen::VectorXd d = next - r.x;
      return (1.0 - kArmijoSigma) * grad.dot(d) + 0.5 * d.dot(gram * d) <= 0.0;
    };
    auto project = [&](double s) -> Eigen::VectorXd { return (r.x - s * grad).cwiseMax(0.0); };

    Eigen::VectorXd next = project(step);
    if (sufficient(next)) {
      // grow the step while the condition keeps holding
      for (int i = 0; i < kMaxStepChanges; ++i) {
        Eigen::VectorXd bigger = project(step / kBacktrack);
        if (!sufficient(bigger) || bigger == next) break;
        step /= kBacktrack;
        next = std::move(bigger);
      }
    } else {
      bool found = false;
      for (int i = 0; i < kMaxStepChanges; ++i) {
        step *= kBacktrack;
        next = project(step);
        if (sufficient(next)) {
          found = true;
          break;
        }
      }
      if (!found) next = r.x;  // step underflow; the face step may still move
    }
    r.x = std::move(next);
    face_step(gram, h, r.x);
  }
  return r;
}

Eigen::VectorXd nnls_solve(const Eigen::MatrixXd& factors, const Eigen::VectorXd& s,
                           const NnlsOptions& options) {
  if (factors.rows() != s.size())
    throw DataError("nnls: factor matrix has " + std::to_string(factors.rows()) + " rows, target has " +
                    std::to_string(s.size()));
  for (Eigen::Index j = 0; j < factors.cols(); ++j)
    if ((factors.col(j).array() == 0.0).all())
      throw NumericalError("nnls: degenerate factor, column " + std::to_string(j) + " is all zero");
  const Eigen::MatrixXd gram = factors.transpose() * factors;
  const Eigen::VectorXd h = factors.transpose() * s;
  return nnls_gram(gram, h, Eigen::VectorXd::Zero(factors.cols()), options).x;
}

}  // namespace msbop
