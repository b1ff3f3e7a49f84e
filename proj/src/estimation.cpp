#include "selgauss/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "selgauss/kde.hpp"
#include "selgauss/normal.hpp"
#include "selgauss/parallel.hpp"

namespace selgauss {

FieldParams SymmetricIsoParam::to_field_params(Kernel kernel) const {
  FieldParams p;
  p.mu = mu;
  p.sigma2 = sigma2;
  p.gamma = gamma;
  p.corr = CorrelationModel{d, d, kernel};
  p.set_template = CoordinateSet::symmetric_tails(a);
  return p;
}

void SymmetricIsoParam::validate() const {
  if (!(sigma2 > 0) || !(d > 0) || !(a > 0)) throw DomainError("sigma2, d, a must be positive");
  if (!(gamma >= 0 && gamma <= 1)) throw DomainError("gamma must lie in [0,1]");
}

double mc_log_likelihood(const SymmetricIsoParam& theta, const Eigen::VectorXd& x,
                         const GridLayout& grid, UniformStream& crn, int n_mc, Kernel kernel) {
  theta.validate();
  return log_density(theta.to_field_params(kernel), grid, x, crn, n_mc);
}

namespace {

// Transformed coordinates: (mu, log sigma2, t(gamma), log d, log a).
Eigen::VectorXd to_unconstrained(const SymmetricIsoParam& p, GammaTransform gt) {
  Eigen::VectorXd t(5);
  t[0] = p.mu;
  t[1] = std::log(p.sigma2);
  const double g = std::clamp(p.gamma, 1e-6, 1.0 - 1e-6);
  t[2] = gt == GammaTransform::logistic ? std::log(g / (1 - g)) : norm_quantile(g);
  t[3] = std::log(p.d);
  t[4] = std::log(p.a);
  return t;
}

SymmetricIsoParam from_unconstrained(const Eigen::VectorXd& t, GammaTransform gt) {
  SymmetricIsoParam p;
  p.mu = t[0];
  p.sigma2 = std::exp(t[1]);
  p.gamma = gt == GammaTransform::logistic ? 1.0 / (1.0 + std::exp(-t[2])) : norm_cdf(t[2]);
  p.d = std::exp(t[3]);
  p.a = std::exp(t[4]);
  return p;
}

}  // namespace

SymmetricIsoParam heuristic_start(const Eigen::VectorXd& x, const GridLayout& grid) {
  SymmetricIsoParam p;
  p.mu = x.mean();
  const double var = (x.array() - p.mu).square().sum() / std::max<double>(1, x.size() - 1);
  p.sigma2 = std::max(var, 1e-6);
  p.gamma = 0.5;
  p.a = std::max(0.5 * std::sqrt(p.sigma2), 1e-3);
  // Empirical correlation half-length along rows.
  double d = 1.0;
  const int cols = grid.cols();
  const int rows = grid.rows();
  for (int lag = 1; lag < std::min(cols, 20); ++lag) {
    double num = 0, cnt = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c + lag < cols; ++c) {
        num += (x[grid.index(r, c)] - p.mu) * (x[grid.index(r, c + lag)] - p.mu);
        cnt += 1;
      }
    const double corr = cnt > 0 ? num / (cnt * p.sigma2) : 0.0;
    if (corr < 0.5) {
      d = lag;
      break;
    }
    d = lag + 1;
  }
  p.d = std::max(d, 0.5);
  return p;
}

FitResult fit(const Eigen::VectorXd& x, const GridLayout& grid, const FitOptions& options) {
  if (options.n_starts < 1) throw DomainError("fit: need at least one start");
  if (options.n_mc < 1000) throw DomainError("fit: n_mc must be >= 1000");
  const std::size_t cap =
      static_cast<std::size_t>(grid.size()) * static_cast<std::size_t>(options.n_mc);
  UniformStream crn(options.crn_seed, cap);

  const auto objective = [&](const Eigen::VectorXd& t) {
    return -mc_log_likelihood(from_unconstrained(t, options.gamma_transform), x, grid, crn,
                              options.n_mc, options.kernel);
  };

  const SymmetricIsoParam center = heuristic_start(x, grid);
  std::vector<SymmetricIsoParam> starts{center};
  Rng jitter(options.start_seed);
  while (static_cast<int>(starts.size()) < options.n_starts) {
    SymmetricIsoParam s = center;
    s.mu += 0.3 * std::sqrt(center.sigma2) * (2 * jitter.uniform() - 1);
    s.sigma2 *= std::exp(0.4 * (2 * jitter.uniform() - 1));
    s.gamma = std::clamp(center.gamma + 0.5 * (2 * jitter.uniform() - 1), 0.05, 0.95);
    s.d *= std::exp(0.5 * (2 * jitter.uniform() - 1));
    s.a *= std::exp(0.6 * (2 * jitter.uniform() - 1));
    starts.push_back(s);
  }

  FitResult result;
  result.crn_seed = options.crn_seed;
  double best_f = std::numeric_limits<double>::infinity();
  for (int s = 0; s < options.n_starts; ++s) {
    BestTracker tracked(objective);
    const Eigen::VectorXd t0 = to_unconstrained(starts[static_cast<std::size_t>(s)],
                                                options.gamma_transform);
    StartTrace trace;
    trace.start = starts[static_cast<std::size_t>(s)];
    trace.f_start = -tracked(t0);

    NelderMeadOptions nm;
    nm.max_iters = options.nm_iters;
    const Eigen::VectorXd step = Eigen::VectorXd::Constant(5, 0.3);
    const OptResult warm = nelder_mead(std::ref(tracked), t0, step, nm);
    trace.f_after_simplex = -warm.f;

    QuasiNewtonOptions qn;
    qn.max_iters = options.polish_iters;
    qn.param_tol = options.param_tol;
    qn.grad_step = options.grad_step;
    const OptResult polish = quasi_newton(std::ref(tracked), warm.x, qn);
    trace.converged = polish.converged;
    trace.f_final = -tracked.best_f();
    trace.evals = tracked.evals();
    result.trace.push_back(trace);

    if (tracked.best_f() < best_f) {
      best_f = tracked.best_f();
      result.theta = from_unconstrained(tracked.best_x(), options.gamma_transform);
      result.log_lik = -best_f;
      result.best_start = s;
      result.converged = polish.converged;
    }
  }
  if (!std::isfinite(best_f)) throw NumericalError("fit: every start failed to produce a finite likelihood");
  return result;
}

std::vector<StudyRow> estimator_study(const SymmetricIsoParam& truth, const std::vector<int>& sides,
                                      const StudyOptions& options) {
  truth.validate();
  std::vector<StudyRow> rows(sides.size() * static_cast<std::size_t>(options.n_rep));
  const int n_rep = options.n_rep;
  const int total = static_cast<int>(rows.size());
  parallel_for(total, options.threads, [&](int task) {
    const int side_idx = task / n_rep;
    const int rep = task % n_rep;
    const int side = sides[static_cast<std::size_t>(side_idx)];
    const GridLayout grid = GridLayout::grid(side, side);
    const std::uint64_t rep_seed = derive_seed(options.seed, static_cast<std::uint64_t>(task));
    const Eigen::MatrixXd data =
        simulate(truth.to_field_params(options.fit.kernel), grid, options.sim, 1, rep_seed);
    FitOptions fo = options.fit;
    fo.crn_seed = derive_seed(rep_seed, 101);
    fo.start_seed = derive_seed(rep_seed, 102);
    StudyRow row;
    row.side = side;
    row.rep = rep;
    const FitResult fr = fit(data.row(0).transpose(), grid, fo);
    row.est = fr.theta;
    row.log_lik = fr.log_lik;
    row.converged = fr.converged;
    rows[static_cast<std::size_t>(task)] = row;
  });
  return rows;
}

std::vector<StudySummaryRow> summarize_study(const std::vector<StudyRow>& rows) {
  std::vector<int> sides;
  for (const auto& r : rows)
    if (std::find(sides.begin(), sides.end(), r.side) == sides.end()) sides.push_back(r.side);
  std::sort(sides.begin(), sides.end());

  const char* names[5] = {"mu", "sigma2", "gamma", "d", "a"};
  std::vector<StudySummaryRow> out;
  for (int side : sides) {
    std::vector<Eigen::VectorXd> cols(5);
    std::vector<double> vals[5];
    for (const auto& r : rows) {
      if (r.side != side) continue;
      vals[0].push_back(r.est.mu);
      vals[1].push_back(r.est.sigma2);
      vals[2].push_back(r.est.gamma);
      vals[3].push_back(r.est.d);
      vals[4].push_back(r.est.a);
    }
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(vals[k].data(), static_cast<Eigen::Index>(vals[k].size()));
      StudySummaryRow s;
      s.side = side;
      s.param = names[k];
      s.mean = v.mean();
      s.sd = v.size() > 1 ? std::sqrt((v.array() - s.mean).square().sum() / (v.size() - 1.0)) : 0.0;
      s.q05 = empirical_quantile(v, 0.05);
      s.q95 = empirical_quantile(v, 0.95);
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace selgauss
