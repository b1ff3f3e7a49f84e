#include "selgauss/mvn_prob.hpp"

#include <cmath>
#include <vector>

#include "selgauss/normal.hpp"

namespace selgauss {

ShiftPolicy ShiftPolicy::explicit_shift(Eigen::VectorXd eta) {
  ShiftPolicy p(Mode::kExplicit);
  p.eta_ = std::move(eta);
  return p;
}

Eigen::VectorXd ShiftPolicy::resolve(const SelectionSet& a, const Eigen::VectorXd& mu,
                                     const Eigen::MatrixXd& sigma) const {
  const Eigen::Index n = mu.size();
  if (mode_ == Mode::kZero) return Eigen::VectorXd::Zero(n);
  if (mode_ == Mode::kExplicit) {
    if (eta_.size() != n) throw DomainError("explicit shift has wrong dimension");
    return eta_;
  }
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CoordinateSet& cs = a.coords[static_cast<std::size_t>(i)];
    if (cs.symmetric_about(mu[i])) continue;
    const double sd = std::sqrt(std::max(sigma(i, i), 0.0));
    eta[i] = nearest_feasible_point(cs, mu[i], sd) - mu[i];
  }
  return eta;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One pass of the sequential importance sampler; log weights appended to
// `logw`. UniformFn supplies one uniform per coordinate per path, always
// consumed so common-random-number streams stay aligned even when a path
// underflows.
template <typename UniformFn>
void accumulate_log_weights(const SelectionSet& a, const Eigen::VectorXd& mu,
                            const CholFactor& chol, const Eigen::VectorXd& eta, int n_samples,
                            UniformFn&& next_uniform, std::vector<double>& logw) {
  const Eigen::Index n = mu.size();
  const Eigen::MatrixXd& l = chol.matrix_l();
  const bool shifted = eta.cwiseAbs().maxCoeff() > 0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  double c_sq = 0;
  if (shifted) {
    c = chol.solve_l(eta);
    c_sq = c.squaredNorm();
  }
  const Eigen::VectorXd mu_shift = mu + eta;
  Eigen::VectorXd z(n);
  logw.reserve(logw.size() + static_cast<std::size_t>(n_samples));

  for (int j = 0; j < n_samples; ++j) {
    double lw = -0.5 * c_sq;
    double zc = 0;
    bool dead = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = next_uniform();
      const double lii = l(i, i);
      const double cm = mu_shift[i] + (i > 0 ? l.row(i).head(i).dot(z.head(i)) : 0.0);
      const double var = lii * lii;
      const CoordinateSet& cs = a.coords[static_cast<std::size_t>(i)];
      const double p = univariate_set_prob(cs, cm, var);
      double xi;
      if (p < 1e-300) {
        dead = true;
        xi = nearest_feasible_point(cs, cm, lii);
      } else {
        xi = truncated_quantile(cs, cm, var, u);
        lw += std::log(p);
      }
      z[i] = (xi - cm) / lii;
      if (shifted) zc += z[i] * c[i];
    }
    logw.push_back(dead ? kNegInf : lw - zc);
  }
}

struct WeightSummary {
  double value;
  double log_value;
  double std_error;
};

WeightSummary summarize(const std::vector<double>& logw) {
  const double m = *std::max_element(logw.begin(), logw.end());
  if (m == kNegInf)
    throw NumericalError(
        "all importance weights underflowed; supply a mean shift toward the set");
  const auto n = static_cast<double>(logw.size());
  double sum = 0;
  for (double lw : logw) sum += std::exp(lw - m);
  const double mean_scaled = sum / n;
  double var_scaled = 0;
  for (double lw : logw) {
    const double d = std::exp(lw - m) - mean_scaled;
    var_scaled += d * d;
  }
  var_scaled = logw.size() > 1 ? var_scaled / (n - 1) : 0.0;
  WeightSummary s;
  s.log_value = m + std::log(mean_scaled);
  s.value = std::exp(s.log_value);
  s.std_error = std::exp(m) * std::sqrt(var_scaled / n);
  return s;
}

void check_inputs(const SelectionSet& a, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                  int n_samples) {
  if (static_cast<Eigen::Index>(a.dim()) != mu.size() || sigma.rows() != mu.size() ||
      sigma.cols() != mu.size())
    throw DomainError("estimate_prob: dimension mismatch between A, mu, Sigma");
  if (n_samples < 1) throw DomainError("estimate_prob: n_samples must be >= 1");
}

}  // namespace

ProbEstimate estimate_prob(const SelectionSet& a, const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& sigma, const ShiftPolicy& shift, int n_samples,
                           std::uint64_t seed) {
  check_inputs(a, mu, sigma, n_samples);
  const Eigen::VectorXd eta = shift.resolve(a, mu, sigma);
  const CholFactor chol = CholFactor::compute(sigma);
  Rng rng(seed);
  std::vector<double> logw;
  accumulate_log_weights(a, mu, chol, eta, n_samples, [&rng] { return rng.uniform(); }, logw);
  const WeightSummary s = summarize(logw);
  ProbEstimate est;
  est.value = std::min(s.value, 1.0);
  est.log_value = std::min(s.log_value, 0.0);
  est.std_error = s.std_error;
  est.n_samples = n_samples;
  est.seed = seed;
  return est;
}

double estimate_log_prob_crn(const SelectionSet& a, const Eigen::VectorXd& mu,
                             const Eigen::MatrixXd& sigma, const ShiftPolicy& shift,
                             UniformStream& crn, int n_samples) {
  check_inputs(a, mu, sigma, n_samples);
  const std::size_t needed = static_cast<std::size_t>(a.dim()) * static_cast<std::size_t>(n_samples);
  if (crn.capacity() < needed) throw NumericalError("uniform stream exhausted");
  crn.reset();
  const Eigen::VectorXd eta = shift.resolve(a, mu, sigma);
  const CholFactor chol = CholFactor::compute(sigma);
  std::vector<double> logw;
  accumulate_log_weights(a, mu, chol, eta, n_samples, [&crn] { return crn.next(); }, logw);
  return std::min(summarize(logw).log_value, 0.0);
}

}  // namespace selgauss
