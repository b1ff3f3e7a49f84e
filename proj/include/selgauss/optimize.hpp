#pragma once

#include <Eigen/Dense>
#include <functional>

namespace selgauss {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
  int max_iters = 200;
  double f_tol = 0;  // 0: run all iterations
};

struct OptResult {
  Eigen::VectorXd x;
  double f = 0;
  int iters = 0;
  int evals = 0;
  bool converged = false;
};

// Minimizes f. Initial simplex: x0 plus one vertex per coordinate offset by
// step[i].
OptResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                      const NelderMeadOptions& opt = {});

struct QuasiNewtonOptions {
  int max_iters = 60;
  double param_tol = 1e-5;
  double grad_step = 1e-4;  // central differences
};

// BFGS with numeric central-difference gradients and Armijo backtracking.
// Intended for smooth deterministic objectives (fixed-CRN likelihoods).
OptResult quasi_newton(const Objective& f, const Eigen::VectorXd& x0,
                       const QuasiNewtonOptions& opt = {});

// Wraps an objective and remembers the best point ever evaluated, so
// multi-phase optimizations can honor "result at least as good as every
// point probed".
class BestTracker {
 public:
  explicit BestTracker(Objective f) : f_(std::move(f)) {}
  double operator()(const Eigen::VectorXd& x);
  const Eigen::VectorXd& best_x() const { return best_x_; }
  double best_f() const { return best_f_; }
  int evals() const { return evals_; }

 private:
  Objective f_;
  Eigen::VectorXd best_x_;
  double best_f_ = std::numeric_limits<double>::infinity();
  int evals_ = 0;
};

}  // namespace selgauss
