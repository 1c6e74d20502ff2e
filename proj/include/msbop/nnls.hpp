#ifndef MSBOP_NNLS_HPP
#define MSBOP_NNLS_HPP

#include <Eigen/Dense>

#include <cstddef>

namespace msbop {

struct NnlsOptions {
  double tol = 1e-6;  // on the projected-gradient norm
  std::size_t max_iter = 200;
};

struct NnlsResult {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
};

// Minimizes q(x) = 1/2 x'Gx - h'x over x >= 0 for symmetric PSD G, starting
// from max(x0, 0). Every iteration is a projected-gradient step with an
// Armijo backtracking search, followed by an exact minimization over the
// current face {x_i > 0} truncated at the feasible boundary. Both steps
// never increase q, so a warm start yields a monotone decrease from x0.
NnlsResult nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& h,
                     const Eigen::VectorXd& x0, const NnlsOptions& options = {});

// argmin ||F a - s||^2 subject to a >= 0. Throws NumericalError when F has
// an all-zero column.
Eigen::VectorXd nnls_solve(const Eigen::MatrixXd& factors, const Eigen::VectorXd& s,
                           const NnlsOptions& options = {});

// Norm of the gradient restricted to directions that keep x >= 0.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient);

}  // namespace msbop

#endif
