#include "selgauss/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "selgauss/normal.hpp"

namespace selgauss {

Kernel kernel_from_string(std::string_view name) {
  if (name == "gauss_kernel" || name == "gauss") return Kernel::gauss;
  if (name == "exp_kernel" || name == "exp") return Kernel::exp;
  throw DomainError("unknown kernel '" + std::string(name) + "' (use gauss_kernel or exp_kernel)");
}

std::string to_string(Kernel k) { return k == Kernel::gauss ? "gauss_kernel" : "exp_kernel"; }

Eigen::MatrixXd correlation_matrix(std::span<const Point2> sites, const CorrelationModel& model) {
  if (!(model.d_h > 0) || !(model.d_v > 0)) throw DomainError("correlation ranges must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dx = sites[static_cast<std::size_t>(i)].x1 - sites[static_cast<std::size_t>(j)].x1;
      const double dy = sites[static_cast<std::size_t>(i)].x2 - sites[static_cast<std::size_t>(j)].x2;
      double r;
      if (model.kernel == Kernel::gauss) {
        r = std::exp(-dx * dx / (model.d_h * model.d_h) - dy * dy / (model.d_v * model.d_v));
      } else {
        r = std::exp(-std::abs(dx) / model.d_h - std::abs(dy) / model.d_v);
      }
      c(i, j) = r;
      c(j, i) = r;
    }
  }
  return c;
}

Eigen::MatrixXd correlation_matrix_1d(const Eigen::VectorXd& positions, double range, Kernel kernel) {
  if (!(range > 0)) throw DomainError("correlation range must be positive");
  const Eigen::Index n = positions.size();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = positions[i] - positions[j];
      const double r = kernel == Kernel::gauss ? std::exp(-d * d / (range * range))
                                               : std::exp(-std::abs(d) / range);
      c(i, j) = r;
      c(j, i) = r;
    }
  }
  return c;
}

CholFactor CholFactor::compute(const Eigen::MatrixXd& sym, JitterInfo* info) {
  if (sym.rows() != sym.cols()) throw DomainError("Cholesky input must be square");
  const Eigen::Index n = sym.rows();
  const double mean_diag = std::max(sym.diagonal().cwiseAbs().mean(), 1e-100);
  CholFactor f;
  double eps = 0;
  int attempts = 0;
  for (;;) {
    ++attempts;
    Eigen::MatrixXd work = sym;
    if (eps > 0) work.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      f.l_ = llt.matrixL();
      f.jitter_ = eps;
      if (info) {
        info->added = eps;
        info->attempts = attempts;
      }
      return f;
    }
    if (eps == 0) {
      eps = 1e-12 * mean_diag;
    } else if (eps < 1e-8 * mean_diag) {
      eps *= 10;
      eps = std::min(eps, 1e-8 * mean_diag);
    } else {
      std::ostringstream msg;
      msg << "matrix of dimension " << n << " is not positive definite within the jitter budget";
      throw NumericalError(msg.str());
    }
  }
}

double CholFactor::log_det() const {
  double s = 0;
  for (Eigen::Index i = 0; i < l_.rows(); ++i) s += std::log(l_(i, i));
  return 2 * s;
}

Eigen::VectorXd CholFactor::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd y = l_.triangularView<Eigen::Lower>().solve(b);
  return l_.triangularView<Eigen::Lower>().transpose().solve(y);
}

Eigen::MatrixXd CholFactor::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd y = l_.triangularView<Eigen::Lower>().solve(b);
  return l_.triangularView<Eigen::Lower>().transpose().solve(y);
}

Eigen::VectorXd CholFactor::solve_l(const Eigen::VectorXd& b) const {
  return l_.triangularView<Eigen::Lower>().solve(b);
}

double CholFactor::quad_form(const Eigen::VectorXd& r) const {
  return l_.triangularView<Eigen::Lower>().solve(r).squaredNorm();
}

namespace {

void require_symmetric(const Eigen::MatrixXd& s, const char* what) {
  if (s.rows() != s.cols()) throw DomainError(std::string(what) + ": matrix not square");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw DomainError(std::string(what) + ": matrix asymmetric beyond tolerance");
}

}  // namespace

GaussianSpec::GaussianSpec(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size()) throw DomainError("GaussianSpec: mean/cov dimension mismatch");
  require_symmetric(cov_, "GaussianSpec");
}

GaussianSpec condition(const GaussianSpec& spec, std::span<const int> observed_indices,
                       const Eigen::VectorXd& observed_values) {
  const Eigen::Index n = spec.dim();
  const Eigen::Index k = static_cast<Eigen::Index>(observed_indices.size());
  if (observed_values.size() != k) throw DomainError("condition: index/value count mismatch");
  std::vector<char> is_obs(static_cast<std::size_t>(n), 0);
  for (int idx : observed_indices) {
    if (idx < 0 || idx >= n) throw DomainError("condition: index out of range");
    if (is_obs[static_cast<std::size_t>(idx)]) throw DomainError("condition: duplicate index");
    is_obs[static_cast<std::size_t>(idx)] = 1;
  }
  std::vector<int> rest;
  rest.reserve(static_cast<std::size_t>(n - k));
  for (int i = 0; i < n; ++i)
    if (!is_obs[static_cast<std::size_t>(i)]) rest.push_back(i);

  Eigen::MatrixXd s_oo(k, k), s_ro(n - k, k), s_rr(n - k, n - k);
  Eigen::VectorXd mu_o(k), mu_r(n - k);
  for (Eigen::Index a = 0; a < k; ++a) {
    mu_o[a] = spec.mean()[observed_indices[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < k; ++b)
      s_oo(a, b) = spec.cov()(observed_indices[static_cast<std::size_t>(a)],
                              observed_indices[static_cast<std::size_t>(b)]);
  }
  for (Eigen::Index a = 0; a < n - k; ++a) {
    mu_r[a] = spec.mean()[rest[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < k; ++b)
      s_ro(a, b) = spec.cov()(rest[static_cast<std::size_t>(a)],
                              observed_indices[static_cast<std::size_t>(b)]);
    for (Eigen::Index b = 0; b < n - k; ++b)
      s_rr(a, b) = spec.cov()(rest[static_cast<std::size_t>(a)], rest[static_cast<std::size_t>(b)]);
  }

  CholFactor f;
  try {
    f = CholFactor::compute(s_oo);
  } catch (const NumericalError&) {
    std::ostringstream msg;
    msg << "conditioning failed: observed block singular beyond jitter budget (indices";
    for (int idx : observed_indices) msg << ' ' << idx;
    msg << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::MatrixXd gain = f.solve(Eigen::MatrixXd(s_ro.transpose())).transpose();  // (n-k) x k
  Eigen::VectorXd mean = mu_r + gain * (observed_values - mu_o);
  Eigen::MatrixXd cov = s_rr - gain * s_ro.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianSpec(std::move(mean), std::move(cov));
}

GaussianSpec marginal(const GaussianSpec& spec, std::span<const int> keep) {
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd mean(m);
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const int ia = keep[static_cast<std::size_t>(a)];
    if (ia < 0 || ia >= spec.dim()) throw DomainError("marginal: index out of range");
    mean[a] = spec.mean()[ia];
    for (Eigen::Index b = 0; b < m; ++b) cov(a, b) = spec.cov()(ia, keep[static_cast<std::size_t>(b)]);
  }
  return GaussianSpec(std::move(mean), std::move(cov));
}

GaussianSpec linear_transform(const GaussianSpec& spec, const Eigen::MatrixXd& m,
                              const Eigen::VectorXd& shift) {
  if (m.cols() != spec.dim()) throw DomainError("linear_transform: matrix columns != spec dimension");
  if (shift.size() != m.rows()) throw DomainError("linear_transform: shift length != matrix rows");
  Eigen::VectorXd mean = m * spec.mean() + shift;
  Eigen::MatrixXd cov = m * spec.cov() * m.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianSpec(std::move(mean), std::move(cov));
}

double log_density(const CholFactor& chol, const Eigen::VectorXd& mean, const Eigen::VectorXd& x) {
  if (x.size() != mean.size() || mean.size() != chol.dim())
    throw DomainError("log_density: dimension mismatch");
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * 2.0 * kLogSqrt2Pi + chol.log_det() + chol.quad_form(x - mean));
}

double log_density(const GaussianSpec& spec, const Eigen::VectorXd& x) {
  const CholFactor f = CholFactor::compute(spec.cov());
  return log_density(f, spec.mean(), x);
}

Eigen::MatrixXd build_selection_covariance(double sigma2, double gamma, const Eigen::MatrixXd& c) {
  if (!(sigma2 > 0)) throw DomainError("sigma2 must be positive");
  if (!(std::abs(gamma) <= 1)) throw DomainError("|gamma| must be <= 1");
  require_symmetric(c, "build_selection_covariance");
  if ((c.diagonal().array() - 1.0).abs().maxCoeff() > 1e-8)
    throw DomainError("build_selection_covariance: C must have unit diagonal");
  const Eigen::Index p = c.rows();
  const double sigma = std::sqrt(sigma2);
  Eigen::MatrixXd s(2 * p, 2 * p);
  s.topLeftCorner(p, p) = sigma2 * c;
  s.topRightCorner(p, p) = gamma * sigma * c;
  s.bottomLeftCorner(p, p) = gamma * sigma * c;
  s.bottomRightCorner(p, p) = gamma * gamma * c;
  s.bottomRightCorner(p, p).diagonal().array() += 1.0 - gamma * gamma;
  return s;
}

}  // namespace selgauss
