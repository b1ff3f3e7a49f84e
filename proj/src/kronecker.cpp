#include "selgauss/kronecker.hpp"

namespace selgauss {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

KroneckerCov::KroneckerCov(std::vector<Eigen::MatrixXd> factors, double sym_tol)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw DomainError("KroneckerCov needs at least one factor");
  dim_ = 1;
  for (const auto& f : factors_) {
    if (f.rows() != f.cols()) throw DomainError("Kronecker factor must be square");
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    if ((f - f.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
      throw DomainError("Kronecker factor asymmetric beyond tolerance");
    dim_ *= f.rows();
  }
}

Eigen::MatrixXd KroneckerCov::dense() const {
  Eigen::MatrixXd out = factors_.front();
  for (std::size_t k = 1; k < factors_.size(); ++k) out = kron(out, factors_[k]);
  return out;
}

Eigen::VectorXd KroneckerCov::apply(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw DomainError("KroneckerCov::apply dimension mismatch");
  if (factors_.size() == 1) return factors_[0] * x;
  // (F (x) R) x: view x as n_F blocks, recurse on the tail product.
  KroneckerCov rest(std::vector<Eigen::MatrixXd>(factors_.begin() + 1, factors_.end()));
  const Eigen::Index nf = factors_[0].rows();
  const Eigen::Index m = dim_ / nf;
  Eigen::MatrixXd rx(m, nf);
  for (Eigen::Index j = 0; j < nf; ++j) rx.col(j) = rest.apply(x.segment(j * m, m));
  Eigen::VectorXd y(dim_);
  for (Eigen::Index i = 0; i < nf; ++i) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < nf; ++j) acc += factors_[0](i, j) * rx.col(j);
    y.segment(i * m, m) = acc;
  }
  return y;
}

}  // namespace selgauss
