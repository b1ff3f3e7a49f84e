#pragma once

#include <Eigen/Dense>
#include <vector>

#include "selgauss/errors.hpp"

namespace selgauss {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Kronecker-structured covariance F_1 (x) F_2 (x) ... with symmetric PSD
// factors. Supports matrix-vector products without materialization; dense()
// materializes for desk-scale sizes.
class KroneckerCov {
 public:
  explicit KroneckerCov(std::vector<Eigen::MatrixXd> factors, double sym_tol = 1e-10);

  Eigen::Index dim() const { return dim_; }
  const std::vector<Eigen::MatrixXd>& factors() const { return factors_; }

  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

 private:
  std::vector<Eigen::MatrixXd> factors_;
  Eigen::Index dim_ = 0;
};

inline KroneckerCov kron_assemble(std::vector<Eigen::MatrixXd> factors) {
  return KroneckerCov(std::move(factors));
}

}  // namespace selgauss
