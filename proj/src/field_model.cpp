#include "selgauss/field_model.hpp"

#include <cmath>

#include "selgauss/kde.hpp"
#include "selgauss/normal.hpp"

namespace selgauss {

GridLayout::GridLayout(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw DomainError("grid dimensions must be positive");
  sites_.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) sites_.push_back({static_cast<double>(c), static_cast<double>(r)});
}

GridLayout GridLayout::line(int n) { return GridLayout(1, n); }
GridLayout GridLayout::grid(int rows, int cols) { return GridLayout(rows, cols); }

void FieldParams::validate() const {
  if (!(sigma2 > 0)) throw DomainError("sigma2 must be positive");
  if (!(std::abs(gamma) <= 1)) throw DomainError("|gamma| must be <= 1");
  if (!(corr.d_h > 0) || !(corr.d_v > 0)) throw DomainError("correlation ranges must be positive");
}

SelectionSet selection_set(const FieldParams& params, const GridLayout& grid) {
  return SelectionSet::repeated(params.set_template, static_cast<std::size_t>(grid.size()));
}

Eigen::MatrixXd latent_covariance(const FieldParams& params, const Eigen::MatrixXd& c) {
  const double g2 = params.gamma * params.gamma;
  Eigen::MatrixXd b = g2 * c;
  b.diagonal().array() += 1.0 - g2;
  return b;
}

McmcConfig resolve_for_kept(const McmcConfig& mcmc, long n_keep) {
  McmcConfig cfg = mcmc;
  const long burn = cfg.resolved_burn_in();
  const long need = burn + (n_keep - 1) * cfg.thin + 1;
  cfg.n_iter = std::max(cfg.n_iter, need);
  cfg.burn_in = burn;
  return cfg;
}

Eigen::MatrixXd simulate(const FieldParams& params, const GridLayout& grid, const McmcConfig& mcmc,
                         int n_real, std::uint64_t seed) {
  params.validate();
  if (n_real < 1) throw DomainError("simulate: n_real must be >= 1");
  const int p = grid.size();
  const double sigma = std::sqrt(params.sigma2);
  const Eigen::MatrixXd c = correlation_matrix(grid.sites(), params.corr);
  const SelectionSet a = selection_set(params, grid);

  Eigen::MatrixXd mean_map;   // gamma*sigma*C*B^{-1}
  Eigen::MatrixXd resid_l;    // Cholesky of the residual covariance
  bool has_resid = false;
  Eigen::MatrixXd b;
  if (params.truncated_limit()) {
    b = c;
    mean_map = params.gamma * sigma * Eigen::MatrixXd::Identity(p, p);
  } else {
    b = latent_covariance(params, c);
    const CholFactor fb = CholFactor::compute(b);
    const Eigen::MatrixXd binv_c = fb.solve(c);
    mean_map = params.gamma * sigma * binv_c.transpose();
    Eigen::MatrixXd resid = params.sigma2 * (c - params.gamma * params.gamma * (c * binv_c));
    resid = 0.5 * (resid + resid.transpose()).eval();
    resid_l = CholFactor::compute(resid).matrix_l();
    has_resid = true;
  }

  const McmcConfig cfg = resolve_for_kept(mcmc, n_real);
  const SampleBatch latent = run_chain(a, Eigen::VectorXd::Zero(p), b, cfg, derive_seed(seed, 0));

  Rng resid_rng(derive_seed(seed, 1));
  Eigen::MatrixXd out(n_real, p);
  Eigen::VectorXd noise(p);
  for (int k = 0; k < n_real; ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(p, params.mu);
    x += mean_map * latent.samples.row(latent.samples.rows() - n_real + k).transpose();
    if (has_resid) {
      for (int i = 0; i < p; ++i) noise[i] = resid_rng.normal();
      x += resid_l.triangularView<Eigen::Lower>() * noise;
    }
    out.row(k) = x.transpose();
  }
  return out;
}

double log_density(const FieldParams& params, const GridLayout& grid, const Eigen::VectorXd& x,
                   UniformStream& crn, int n_mc, const ShiftPolicy& shift) {
  params.validate();
  const int p = grid.size();
  if (x.size() != p) throw DomainError("log_density: x has wrong length");
  const double sigma = std::sqrt(params.sigma2);
  const Eigen::MatrixXd c = correlation_matrix(grid.sites(), params.corr);
  const CholFactor fc = CholFactor::compute(params.sigma2 * c);
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(p, params.mu);
  const double log_phi = log_density(fc, mean, x);

  // The selection numerator and denominator cancel exactly when the coupling
  // vanishes.
  if (params.gamma == 0.0) return log_phi;

  const SelectionSet a = selection_set(params, grid);
  if (params.truncated_limit()) {
    for (int i = 0; i < p; ++i) {
      const double s = params.gamma > 0 ? 1.0 : -1.0;
      if (!contains(params.set_template, s * (x[i] - params.mu) / sigma))
        return -std::numeric_limits<double>::infinity();
    }
    const double log_denom =
        estimate_log_prob_crn(a, Eigen::VectorXd::Zero(p), c, shift, crn, n_mc);
    return log_phi - log_denom;
  }

  const double resid_var = 1.0 - params.gamma * params.gamma;
  double log_num = 0;
  for (int i = 0; i < p; ++i) {
    const double cond_mean = params.gamma / sigma * (x[i] - params.mu);
    const double term = univariate_set_prob(params.set_template, cond_mean, resid_var);
    if (term <= 0) return -std::numeric_limits<double>::infinity();
    log_num += std::log(term);
  }
  const Eigen::MatrixXd b = latent_covariance(params, c);
  const double log_denom = estimate_log_prob_crn(a, Eigen::VectorXd::Zero(p), b, shift, crn, n_mc);
  return log_phi + log_num - log_denom;
}

double log_density(const FieldParams& params, const GridLayout& grid, const Eigen::VectorXd& x,
                   const DensityOptions& opts) {
  UniformStream crn(opts.crn_seed,
                    static_cast<std::size_t>(grid.size()) * static_cast<std::size_t>(opts.n_mc));
  return log_density(params, grid, x, crn, opts.n_mc, opts.shift);
}

ConditionalFieldSpec condition_exact(const FieldParams& params, const GridLayout& grid,
                                     std::span<const int> obs_sites,
                                     const Eigen::VectorXd& obs_values) {
  params.validate();
  const int p = grid.size();
  if (static_cast<Eigen::Index>(obs_sites.size()) != obs_values.size())
    throw DomainError("condition_exact: site/value count mismatch");
  std::vector<char> is_obs(static_cast<std::size_t>(p), 0);
  for (int s : obs_sites) {
    if (s < 0 || s >= p) throw DomainError("condition_exact: site index out of range");
    if (is_obs[static_cast<std::size_t>(s)]) throw DomainError("condition_exact: duplicate site");
    is_obs[static_cast<std::size_t>(s)] = 1;
  }

  const Eigen::MatrixXd c = correlation_matrix(grid.sites(), params.corr);
  Eigen::VectorXd mean(2 * p);
  mean.head(p).setConstant(params.mu);
  mean.tail(p).setZero();
  GaussianSpec joint_full(std::move(mean), build_selection_covariance(params.sigma2, params.gamma, c));

  ConditionalFieldSpec spec;
  spec.obs_sites.assign(obs_sites.begin(), obs_sites.end());
  spec.obs_values = obs_values;
  spec.n_sites = p;
  spec.q = p;
  for (int i = 0; i < p; ++i)
    if (!is_obs[static_cast<std::size_t>(i)]) spec.unobs_sites.push_back(i);
  spec.a = selection_set(params, grid);
  spec.joint = condition(joint_full, spec.obs_sites, obs_values);
  return spec;
}

Eigen::MatrixXd conditional_simulate(const ConditionalFieldSpec& spec, const McmcConfig& mcmc,
                                     std::uint64_t seed) {
  const int nu = spec.n_unobs();
  const int q = spec.q;

  std::vector<int> latent_idx(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) latent_idx[static_cast<std::size_t>(i)] = nu + i;
  const GaussianSpec latent = marginal(spec.joint, latent_idx);

  const long burn = mcmc.resolved_burn_in();
  const long n_keep = (mcmc.n_iter - burn - 1) / mcmc.thin + 1;
  const SampleBatch batch = run_chain(spec.a, latent.mean(), latent.cov(), mcmc, derive_seed(seed, 0));

  Eigen::MatrixXd out(n_keep, spec.n_sites);
  for (long k = 0; k < n_keep; ++k)
    for (std::size_t j = 0; j < spec.obs_sites.size(); ++j)
      out(k, spec.obs_sites[j]) = spec.obs_values[static_cast<Eigen::Index>(j)];
  if (nu == 0) return out;

  // Gaussian conditional of the unobserved sites given each latent draw; the
  // gain and residual factor are fixed, only the mean moves.
  Eigen::MatrixXd cross(nu, q);
  Eigen::MatrixXd s_uu(nu, nu);
  for (int a = 0; a < nu; ++a) {
    for (int b = 0; b < q; ++b) cross(a, b) = spec.joint.cov()(a, nu + b);
    for (int b = 0; b < nu; ++b) s_uu(a, b) = spec.joint.cov()(a, b);
  }
  const CholFactor f_lat = CholFactor::compute(latent.cov());
  const Eigen::MatrixXd gain = f_lat.solve(Eigen::MatrixXd(cross.transpose())).transpose();
  Eigen::MatrixXd cond_cov = s_uu - gain * cross.transpose();
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();
  const Eigen::MatrixXd l_cond = CholFactor::compute(cond_cov).matrix_l();

  Rng rng(derive_seed(seed, 1));
  Eigen::VectorXd noise(nu);
  const Eigen::VectorXd mu_u = spec.joint.mean().head(nu);
  for (long k = 0; k < n_keep; ++k) {
    const Eigen::VectorXd u2 = batch.samples.row(k).transpose();
    for (int i = 0; i < nu; ++i) noise[i] = rng.normal();
    const Eigen::VectorXd draw =
        mu_u + gain * (u2 - latent.mean()) + l_cond.triangularView<Eigen::Lower>() * noise;
    for (int i = 0; i < nu; ++i) out(k, spec.unobs_sites[static_cast<std::size_t>(i)]) = draw[i];
  }
  return out;
}

PredictionSummary summarize_draws(const Eigen::MatrixXd& draws, double lower_level,
                                  double upper_level) {
  const Eigen::Index p = draws.cols();
  PredictionSummary s;
  s.lower_level = lower_level;
  s.upper_level = upper_level;
  s.n_draws = static_cast<int>(draws.rows());
  s.mean.resize(p);
  s.median.resize(p);
  s.mode.resize(p);
  s.lower.resize(p);
  s.upper.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd col = draws.col(j);
    s.mean[j] = col.mean();
    s.median[j] = empirical_quantile(col, 0.5);
    s.mode[j] = kde_mode(col);
    s.lower[j] = empirical_quantile(col, lower_level);
    s.upper[j] = empirical_quantile(col, upper_level);
  }
  return s;
}

PredictionSummary predict(const ConditionalFieldSpec& spec, const McmcConfig& mcmc,
                          std::uint64_t seed, double lower_level, double upper_level) {
  const long burn = mcmc.resolved_burn_in();
  const long n_keep = (mcmc.n_iter - burn - 1) / mcmc.thin + 1;
  if (n_keep < 1000) throw DomainError("predict: needs at least 1000 kept draws");
  const Eigen::MatrixXd draws = conditional_simulate(spec, mcmc, seed);
  return summarize_draws(draws, lower_level, upper_level);
}

GaussianSpec gaussian_match(const FieldParams& params, const GridLayout& grid, int n_real,
                            std::uint64_t seed) {
  if (n_real < 2) throw DomainError("gaussian_match: n_real must be >= 2");
  const Eigen::MatrixXd draws = simulate(params, grid, McmcConfig{}, n_real, seed);
  const Eigen::VectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n_real - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianSpec(mean, std::move(cov));
}

}  // namespace selgauss
