#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "selgauss/field_model.hpp"
#include "selgauss/optimize.hpp"

namespace selgauss {

// Isotropic symmetric-set parameterization: mean, scale, coupling in [0,1],
// shared range d = d_h = d_v, and A_i = (-inf,-a] U [a,inf).
struct SymmetricIsoParam {
  double mu = 0;
  double sigma2 = 1;
  double gamma = 0.5;
  double d = 2;
  double a = 0.3;

  FieldParams to_field_params(Kernel kernel = Kernel::gauss) const;
  void validate() const;
};

enum class GammaTransform { logistic, probit };

struct FitOptions {
  int n_starts = 5;
  int nm_iters = 200;
  int polish_iters = 60;
  double param_tol = 1e-5;
  double grad_step = 1e-4;
  int n_mc = 5000;
  std::uint64_t crn_seed = 777001;
  std::uint64_t start_seed = 20240101;
  GammaTransform gamma_transform = GammaTransform::logistic;
  Kernel kernel = Kernel::gauss;
};

struct StartTrace {
  SymmetricIsoParam start;
  double f_start = 0;
  double f_after_simplex = 0;
  double f_final = 0;
  int evals = 0;
  bool converged = false;
};

struct FitResult {
  SymmetricIsoParam theta;
  double log_lik = 0;
  int best_start = -1;
  bool converged = false;
  std::vector<StartTrace> trace;
  std::uint64_t crn_seed = 0;
};

// Smooth common-random-number log-likelihood; bitwise reproducible for fixed
// (theta, data, stream). Throws DomainError outside the parameter bounds.
double mc_log_likelihood(const SymmetricIsoParam& theta, const Eigen::VectorXd& x,
                         const GridLayout& grid, UniformStream& crn, int n_mc,
                         Kernel kernel = Kernel::gauss);

// Moment-based start: sample mean/variance, gamma 0.5, a at half the sample
// sd, d from the empirical correlation half-length.
SymmetricIsoParam heuristic_start(const Eigen::VectorXd& x, const GridLayout& grid);

// Multi-start maximum likelihood: per start, a simplex warm-up (the
// information matrix degenerates near gamma = 0, so no gradients early)
// followed by quasi-Newton polish on transformed coordinates. Bounds are
// enforced by smooth transforms: log for sigma2/d/a, logistic (or probit)
// for gamma.
FitResult fit(const Eigen::VectorXd& x, const GridLayout& grid, const FitOptions& options = {});

struct StudyOptions {
  int n_rep = 50;
  FitOptions fit;
  McmcConfig sim;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct StudyRow {
  int side = 0;
  int rep = 0;
  SymmetricIsoParam est;
  double log_lik = 0;
  bool converged = false;
};

// One simulated realization per replicate per grid side, refit each time.
std::vector<StudyRow> estimator_study(const SymmetricIsoParam& truth, const std::vector<int>& sides,
                                      const StudyOptions& options);

struct StudySummaryRow {
  int side = 0;
  std::string param;
  double mean = 0, sd = 0, q05 = 0, q95 = 0;
};

std::vector<StudySummaryRow> summarize_study(const std::vector<StudyRow>& rows);

}  // namespace selgauss
