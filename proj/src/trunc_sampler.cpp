#include "selgauss/trunc_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selgauss {

namespace {

constexpr double kUnderflow = 1e-300;

std::vector<int> neighborhood(const Eigen::MatrixXd& corr_abs, int anchor, int n_a) {
  const Eigen::Index n = corr_abs.rows();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::nth_element(order.begin(), order.begin() + n_a - 1, order.end(), [&](int a, int b) {
    const double ca = corr_abs(anchor, a), cb = corr_abs(anchor, b);
    return ca > cb || (ca == cb && a < b);
  });
  order.resize(static_cast<std::size_t>(n_a));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

BlockPlan::BlockPlan(const Eigen::MatrixXd& sigma, int block_size) {
  const Eigen::Index n = sigma.rows();
  if (n == 0) throw DomainError("BlockPlan: empty covariance");
  block_size_ = block_size > 0 ? block_size : static_cast<int>(std::min<Eigen::Index>(100, n));
  if (block_size_ > n) throw DomainError("BlockPlan: block size exceeds dimension");

  marginal_sd_ = sigma.diagonal().cwiseMax(0.0).cwiseSqrt();
  const CholFactor chol = CholFactor::compute(sigma);
  precision_ = chol.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
  precision_ = 0.5 * (precision_ + precision_.transpose()).eval();

  Eigen::MatrixXd corr_abs(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      corr_abs(i, j) = std::abs(sigma(i, j)) / std::max(marginal_sd_[i] * marginal_sd_[j], 1e-300);

  const int stride = std::max(1, block_size_ / 2);
  std::vector<int> anchors;
  for (int i = 0; i < n; i += stride) anchors.push_back(i);

  coverage_.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> nbhds;
  for (int anc : anchors) {
    nbhds.push_back(neighborhood(corr_abs, anc, block_size_));
    for (int j : nbhds.back()) ++coverage_[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < n; ++j) {
    if (coverage_[static_cast<std::size_t>(j)] > 0) continue;
    anchors.push_back(j);
    nbhds.push_back(neighborhood(corr_abs, j, block_size_));
    for (int m : nbhds.back()) ++coverage_[static_cast<std::size_t>(m)];
  }

  blocks_.reserve(anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    Block b;
    b.anchor = anchors[k];
    b.idx = std::move(nbhds[k]);
    const auto na = static_cast<Eigen::Index>(b.idx.size());
    b.q_aa.resize(na, na);
    for (Eigen::Index r = 0; r < na; ++r)
      for (Eigen::Index c = 0; c < na; ++c)
        b.q_aa(r, c) = precision_(b.idx[static_cast<std::size_t>(r)], b.idx[static_cast<std::size_t>(c)]);
    const CholFactor fq = CholFactor::compute(b.q_aa);
    Eigen::MatrixXd cond_cov = fq.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(na, na)));
    cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();
    b.l_cond = CholFactor::compute(cond_cov).matrix_l();
    blocks_.push_back(std::move(b));
  }
}

Eigen::VectorXd initialize_feasible(const SelectionSet& a, const Eigen::VectorXd& mu,
                                    const Eigen::MatrixXd& sigma) {
  if (static_cast<Eigen::Index>(a.dim()) != mu.size())
    throw DomainError("initialize_feasible: dimension mismatch");
  Eigen::VectorXd x(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double sd = std::sqrt(std::max(sigma(i, i), 0.0));
    x[i] = nearest_feasible_point(a.coords[static_cast<std::size_t>(i)], mu[i], sd);
  }
  return x;
}

BlockProposal propose_block(const Eigen::VectorXd& x, const BlockPlan& plan, int block_index,
                            const SelectionSet& a, const Eigen::VectorXd& mu, Rng& rng) {
  const BlockPlan::Block& b = plan.blocks()[static_cast<std::size_t>(block_index)];
  const auto na = static_cast<Eigen::Index>(b.idx.size());
  const Eigen::MatrixXd& q = plan.precision();
  const Eigen::MatrixXd& l = b.l_cond;

  const Eigen::VectorXd dx = x - mu;
  Eigen::VectorXd v(na);
  Eigen::VectorXd dxa(na);
  for (Eigen::Index r = 0; r < na; ++r) {
    v[r] = q.row(b.idx[static_cast<std::size_t>(r)]).dot(dx);
    dxa[r] = dx[b.idx[static_cast<std::size_t>(r)]];
  }
  v -= b.q_aa * dxa;
  // Conditional mean of the block given the complement.
  Eigen::VectorXd m(na);
  for (Eigen::Index r = 0; r < na; ++r) m[r] = mu[b.idx[static_cast<std::size_t>(r)]];
  m -= l * (l.transpose() * v);

  BlockProposal prop;
  prop.values.resize(na);
  Eigen::VectorXd z_new(na), z_old(na);
  for (Eigen::Index i = 0; i < na; ++i) {
    const CoordinateSet& cs = a.coords[static_cast<std::size_t>(b.idx[static_cast<std::size_t>(i)])];
    const double lii = l(i, i);
    const double var = lii * lii;
    const double head_new = i > 0 ? l.row(i).head(i).dot(z_new.head(i)) : 0.0;
    const double head_old = i > 0 ? l.row(i).head(i).dot(z_old.head(i)) : 0.0;
    const double cm_new = m[i] + head_new;
    const double cm_old = m[i] + head_old;

    const double u = rng.uniform();
    const double p_new = univariate_set_prob(cs, cm_new, var);
    if (p_new < kUnderflow) {
      prop.underflow = true;
      prop.values[i] = nearest_feasible_point(cs, cm_new, lii);
    } else {
      prop.values[i] = truncated_quantile(cs, cm_new, var, u);
      prop.log_weight_new += std::log(p_new);
    }
    z_new[i] = (prop.values[i] - cm_new) / lii;

    const double p_old = univariate_set_prob(cs, cm_old, var);
    prop.log_weight_old += p_old < kUnderflow ? -std::numeric_limits<double>::infinity()
                                              : std::log(p_old);
    z_old[i] = (x[b.idx[static_cast<std::size_t>(i)]] - cm_old) / lii;
  }
  return prop;
}

SampleBatch run_chain(const SelectionSet& a, const Eigen::VectorXd& mu, const BlockPlan& plan,
                      const McmcConfig& config, std::uint64_t seed) {
  const Eigen::Index n = mu.size();
  if (static_cast<int>(a.dim()) != plan.dim() || n != plan.dim())
    throw DomainError("run_chain: dimension mismatch");
  const long burn = config.resolved_burn_in();
  if (config.n_iter <= burn) throw DomainError("run_chain: n_iter must exceed burn_in");
  if (config.thin < 1) throw DomainError("run_chain: thin must be >= 1");
  const long n_keep = (config.n_iter - burn - 1) / config.thin + 1;
  if (n_keep < 1) throw NumericalError("run_chain: zero kept samples after thinning");

  Eigen::VectorXd x(n);
  {
    Eigen::VectorXd sd = plan.marginal_sd();
    for (Eigen::Index i = 0; i < n; ++i)
      x[i] = nearest_feasible_point(a.coords[static_cast<std::size_t>(i)], mu[i], sd[i]);
  }

  SampleBatch batch;
  batch.samples.resize(n_keep, n);
  batch.burn_in = burn;
  batch.thin = config.thin;
  batch.seed = seed;
  batch.accept_trace.assign(static_cast<std::size_t>(config.n_iter), 0);

  Rng rng(seed);
  const std::size_t nb = plan.blocks().size();
  long accepted = 0;
  long row = 0;
  for (long it = 0; it < config.n_iter; ++it) {
    const int k = static_cast<int>(rng.index(nb));
    BlockProposal prop = propose_block(x, plan, k, a, mu, rng);
    bool accept = false;
    if (prop.underflow) {
      ++batch.underflow_rejects;
    } else {
      const double log_alpha = prop.log_weight_new - prop.log_weight_old;
      accept = log_alpha >= 0 || std::log(rng.uniform()) < log_alpha;
    }
    if (accept) {
      const auto& idx = plan.blocks()[static_cast<std::size_t>(k)].idx;
      for (std::size_t i = 0; i < idx.size(); ++i)
        x[idx[i]] = prop.values[static_cast<Eigen::Index>(i)];
      ++accepted;
      batch.accept_trace[static_cast<std::size_t>(it)] = 1;
    }
    if (it >= burn && (it - burn) % config.thin == 0) {
      if (!a.contains_point(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))))
        throw NumericalError("run_chain: kept sample left the selection set");
      batch.samples.row(row++) = x.transpose();
    }
  }
  batch.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.n_iter);
  return batch;
}

SampleBatch run_chain(const SelectionSet& a, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                      const McmcConfig& config, std::uint64_t seed) {
  BlockPlan plan(sigma, config.block_size);
  return run_chain(a, mu, plan, config, seed);
}

}  // namespace selgauss
