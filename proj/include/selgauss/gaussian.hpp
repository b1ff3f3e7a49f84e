#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selgauss/errors.hpp"

namespace selgauss {

struct Point2 {
  double x1 = 0;
  double x2 = 0;
};

// The default kernel is the squared-exponential form
// exp(-dx1^2/d_h^2 - dx2^2/d_v^2); `exp` switches to exp(-|dx1|/d_h - |dx2|/d_v).
// Config keys: gauss_kernel (default) / exp_kernel.
enum class Kernel { gauss, exp };

Kernel kernel_from_string(std::string_view name);
std::string to_string(Kernel k);

struct CorrelationModel {
  double d_h = 1;
  double d_v = 1;
  Kernel kernel = Kernel::gauss;
};

Eigen::MatrixXd correlation_matrix(std::span<const Point2> sites, const CorrelationModel& model);

// One-dimensional correlation over scalar positions (time samples, angles).
Eigen::MatrixXd correlation_matrix_1d(const Eigen::VectorXd& positions, double range, Kernel kernel = Kernel::gauss);

struct JitterInfo {
  double added = 0;
  int attempts = 0;
};

// Cholesky with an escalating diagonal jitter of 1e-12..1e-8 times the mean
// diagonal. Failure beyond that budget throws NumericalError. Jitter
// applications are surfaced through JitterInfo rather than hidden.
class CholFactor {
 public:
  static CholFactor compute(const Eigen::MatrixXd& sym, JitterInfo* info = nullptr);

  Eigen::Index dim() const { return l_.rows(); }
  const Eigen::MatrixXd& matrix_l() const { return l_; }
  double jitter() const { return jitter_; }
  double log_det() const;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  // Forward substitution L y = b.
  Eigen::VectorXd solve_l(const Eigen::VectorXd& b) const;
  // r' S^{-1} r
  double quad_form(const Eigen::VectorXd& r) const;

 private:
  Eigen::MatrixXd l_;
  double jitter_ = 0;
};

// Mean vector plus dense symmetric covariance. Immutable after construction;
// callers needing repeated solves hold a CholFactor as the read-only handle.
class GaussianSpec {
 public:
  GaussianSpec() = default;
  GaussianSpec(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

// Condition on exact values of a subset of coordinates; the result is over
// the remaining coordinates in ascending original order. The conditional
// covariance does not depend on the observed values.
GaussianSpec condition(const GaussianSpec& spec, std::span<const int> observed_indices,
                       const Eigen::VectorXd& observed_values);

GaussianSpec marginal(const GaussianSpec& spec, std::span<const int> keep);

// Mean -> M mu + shift, covariance -> M Sigma M'.
GaussianSpec linear_transform(const GaussianSpec& spec, const Eigen::MatrixXd& m,
                              const Eigen::VectorXd& shift);

double log_density(const GaussianSpec& spec, const Eigen::VectorXd& x);
double log_density(const CholFactor& chol, const Eigen::VectorXd& mean, const Eigen::VectorXd& x);

// 2p x 2p blocks [s2*C, g*s*C; g*s*C, (1-g^2)*I + g^2*C].
Eigen::MatrixXd build_selection_covariance(double sigma2, double gamma, const Eigen::MatrixXd& c);

}  // namespace selgauss
