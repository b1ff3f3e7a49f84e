#include "selgauss/seismic.hpp"

#include <cmath>
#include <filesystem>

#include "selgauss/csv.hpp"
#include "selgauss/kde.hpp"
#include "selgauss/kronecker.hpp"
#include "selgauss/mvn_prob.hpp"
#include "selgauss/normal.hpp"
#include "selgauss/optimize.hpp"

namespace selgauss {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd sample_positions(int n) {
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return p;
}

}  // namespace

Wavelet ricker_wavelet(double peak_freq_hz, double dt_ms, int half_length) {
  if (!(peak_freq_hz > 0) || !(dt_ms > 0) || half_length < 0)
    throw DomainError("ricker_wavelet: bad parameters");
  Wavelet w;
  w.lags.resize(2 * half_length + 1);
  w.weights.resize(2 * half_length + 1);
  for (int k = -half_length; k <= half_length; ++k) {
    const double tau = k * dt_ms / 1000.0;
    const double arg = kPi * kPi * peak_freq_hz * peak_freq_hz * tau * tau;
    w.lags[k + half_length] = k;
    w.weights[k + half_length] = (1 - 2 * arg) * std::exp(-arg);
  }
  return w;
}

Eigen::VectorXd AvoDataset::t() const {
  Eigen::VectorXd out(n_t());
  for (int i = 0; i < n_t(); ++i) out[i] = t0 + i * dt;
  return out;
}

Eigen::VectorXd AvoDataset::stacked_data() const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(n_t()) * n_angles());
  for (int a = 0; a < n_angles(); ++a) d.segment(a * n_t(), n_t()) = traces.col(a);
  return d;
}

Eigen::VectorXd AvoDataset::stacked_logs() const {
  Eigen::VectorXd m(static_cast<Eigen::Index>(n_t()) * 3);
  for (int k = 0; k < 3; ++k) m.segment(k * n_t(), n_t()) = well_logs.col(k);
  return m;
}

void AvoDataset::validate() const {
  if (well_logs.cols() != 3) throw DomainError("well_logs must have 3 columns");
  if (traces.rows() != well_logs.rows()) throw DomainError("traces/logs length mismatch");
  if (traces.cols() != angles_deg.size()) throw DomainError("traces/angles mismatch");
  if (static_cast<int>(wavelets.size()) != n_angles()) throw DomainError("one wavelet per angle required");
  if (!traces.allFinite() || !well_logs.allFinite()) throw DomainError("non-finite values in dataset");
  if (!(dt > 0)) throw DomainError("dt must be positive");
}

AvoDataset load_avo_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  AvoDataset data;
  const Eigen::MatrixXd well = read_matrix_csv((fs::path(dir) / "well.csv").string());
  if (well.cols() != 4) throw DomainError("well.csv must have columns t,log_vp,log_vs,log_rho");
  data.well_logs = well.rightCols(3);
  data.t0 = well(0, 0);
  data.dt = well.rows() > 1 ? well(1, 0) - well(0, 0) : 1.0;

  std::vector<std::string> header;
  const Eigen::MatrixXd seis = read_matrix_csv((fs::path(dir) / "seismic.csv").string(), &header);
  if (seis.rows() != well.rows()) throw DomainError("seismic.csv/well.csv length mismatch");
  const int n_angles = static_cast<int>(seis.cols()) - 1;
  if (n_angles < 1) throw DomainError("seismic.csv needs at least one amplitude column");
  data.traces = seis.rightCols(n_angles);
  data.angles_deg.resize(n_angles);
  for (int a = 0; a < n_angles; ++a) {
    if (static_cast<int>(header.size()) == n_angles + 1 && header[a + 1].rfind("amp_", 0) == 0) {
      data.angles_deg[a] = std::stod(header[a + 1].substr(4));
    } else {
      throw DomainError("seismic.csv must carry amp_<angle> column headers");
    }
  }
  for (int a = 0; a < n_angles; ++a) {
    const std::string path =
        (fs::path(dir) / ("wavelet_" + format_double(data.angles_deg[a]) + ".csv")).string();
    const Eigen::MatrixXd wmat = read_matrix_csv(path);
    if (wmat.cols() != 2) throw DomainError(path + ": expected columns lag,weight");
    Wavelet w;
    w.lags = wmat.col(0).cast<int>();
    w.weights = wmat.col(1);
    data.wavelets.push_back(std::move(w));
  }
  data.validate();
  return data;
}

void save_avo_dataset(const AvoDataset& data, const std::string& dir) {
  namespace fs = std::filesystem;
  data.validate();
  fs::create_directories(dir);
  const Eigen::VectorXd t = data.t();

  Eigen::MatrixXd well(data.n_t(), 4);
  well.col(0) = t;
  well.rightCols(3) = data.well_logs;
  write_matrix_csv((fs::path(dir) / "well.csv").string(), well, {"t", "log_vp", "log_vs", "log_rho"});

  Eigen::MatrixXd seis(data.n_t(), data.n_angles() + 1);
  seis.col(0) = t;
  seis.rightCols(data.n_angles()) = data.traces;
  std::vector<std::string> header{"t"};
  for (int a = 0; a < data.n_angles(); ++a) header.push_back("amp_" + format_double(data.angles_deg[a]));
  write_matrix_csv((fs::path(dir) / "seismic.csv").string(), seis, header);

  for (int a = 0; a < data.n_angles(); ++a) {
    const Wavelet& w = data.wavelets[static_cast<std::size_t>(a)];
    Eigen::MatrixXd wm(w.lags.size(), 2);
    wm.col(0) = w.lags.cast<double>();
    wm.col(1) = w.weights;
    write_matrix_csv((fs::path(dir) / ("wavelet_" + format_double(data.angles_deg[a]) + ".csv")).string(),
                     wm, {"lag", "weight"});
  }
}

ForwardOperator build_forward(const std::vector<Wavelet>& wavelets, const Eigen::VectorXd& angles_deg,
                              double vsvp_ratio, int n_t) {
  const int n_angles = static_cast<int>(angles_deg.size());
  if (static_cast<int>(wavelets.size()) != n_angles) throw DomainError("one wavelet per angle required");
  if (!(vsvp_ratio > 0 && vsvp_ratio < 1)) throw DomainError("background vs/vp ratio must lie in (0,1)");
  if (n_t < 2) throw DomainError("n_t must be >= 2");

  ForwardOperator fwd;
  fwd.n_t = n_t;
  fwd.angles_deg = angles_deg;
  fwd.vsvp_ratio = vsvp_ratio;
  const int nd = n_angles * n_t;
  const int nm = 3 * n_t;

  // Reflectivity weights on contrasts of (log v_p, log v_s, log rho).
  Eigen::MatrixXd coef(n_angles, 3);
  for (int a = 0; a < n_angles; ++a) {
    const double theta = angles_deg[a] * kPi / 180.0;
    const double t2 = std::tan(theta) * std::tan(theta);
    if (!std::isfinite(t2) || t2 > 1e8) throw DomainError("reflection angle too close to 90 degrees");
    const double s2 = std::sin(theta) * std::sin(theta);
    coef(a, 0) = 0.5 * (1 + t2);
    coef(a, 1) = -4 * vsvp_ratio * vsvp_ratio * s2;
    coef(a, 2) = 0.5 * (1 - 4 * vsvp_ratio * vsvp_ratio * s2);
  }
  fwd.a_coef = kron(coef, Eigen::MatrixXd::Identity(n_t, n_t));

  // Forward differences with a zero top boundary row per property.
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(n_t, n_t);
  for (int t = 1; t < n_t; ++t) {
    d1(t, t) = 1;
    d1(t, t - 1) = -1;
  }
  fwd.d = kron(Eigen::MatrixXd::Identity(3, 3), d1);

  fwd.w = Eigen::MatrixXd::Zero(nd, nd);
  for (int a = 0; a < n_angles; ++a) {
    const Wavelet& w = wavelets[static_cast<std::size_t>(a)];
    for (int t = 0; t < n_t; ++t)
      for (Eigen::Index k = 0; k < w.lags.size(); ++k) {
        const int src = t - w.lags[k];
        if (src >= 0 && src < n_t) fwd.w(a * n_t + t, a * n_t + src) += w.weights[k];
      }
  }
  fwd.g = fwd.w * fwd.a_coef * fwd.d;
  if (fwd.g.rows() != nd || fwd.g.cols() != nm) throw NumericalError("forward operator shape error");
  return fwd;
}

Eigen::MatrixXd error_covariance(const ErrorModel& model, const Eigen::VectorXd& angles_deg, int n_t) {
  if (!(model.sigma2_e > 0) || !(model.d0_e > 0) || !(model.d_e > 0))
    throw DomainError("error model parameters must be positive");
  const Eigen::MatrixXd c0 = correlation_matrix_1d(angles_deg, model.d0_e, model.kernel);
  const Eigen::MatrixXd ce = correlation_matrix_1d(sample_positions(n_t), model.d_e, model.kernel);
  return model.sigma2_e * kron(c0, ce);
}

namespace {

// Gaussian log-density with sigma2 * (C0 (x) Ce) covariance evaluated through
// the factor Choleskys: logdet splits, the quadratic form reshapes to
// tr(X' Ce^-1 X C0^-1).
double kron_gauss_logpdf(const Eigen::VectorXd& r, double sigma2, const Eigen::MatrixXd& c0,
                         const Eigen::MatrixXd& ce) {
  const Eigen::Index n0 = c0.rows();
  const Eigen::Index ne = ce.rows();
  const Eigen::Index n = n0 * ne;
  const CholFactor f0 = CholFactor::compute(c0);
  const CholFactor fe = CholFactor::compute(ce);
  Eigen::MatrixXd x(ne, n0);
  for (Eigen::Index j = 0; j < n0; ++j) x.col(j) = r.segment(j * ne, ne);
  const Eigen::MatrixXd a = fe.matrix_l().triangularView<Eigen::Lower>().solve(x);
  const Eigen::MatrixXd b =
      f0.matrix_l().triangularView<Eigen::Lower>().solve(a.transpose());
  const double quad = b.squaredNorm() / sigma2;
  const double logdet =
      static_cast<double>(n) * std::log(sigma2) + static_cast<double>(ne) * f0.log_det() +
      static_cast<double>(n0) * fe.log_det();
  return -0.5 * (static_cast<double>(n) * 2.0 * kLogSqrt2Pi + logdet + quad);
}

}  // namespace

ErrorModel fit_error_model(const AvoDataset& data, const ForwardOperator& fwd,
                           const ErrorFitOptions& options) {
  data.validate();
  const Eigen::VectorXd resid = data.stacked_data() - fwd.g * data.stacked_logs();
  const int n_t = data.n_t();
  const Eigen::VectorXd pos = sample_positions(n_t);
  const Kernel kernel = options.start.kernel;

  const auto objective = [&](const Eigen::VectorXd& t) {
    const double s2 = std::exp(t[0]);
    const double d0 = std::exp(t[1]);
    const double de = std::exp(t[2]);
    const Eigen::MatrixXd c0 = correlation_matrix_1d(data.angles_deg, d0, kernel);
    const Eigen::MatrixXd ce = correlation_matrix_1d(pos, de, kernel);
    return -kron_gauss_logpdf(resid, s2, c0, ce);
  };

  ErrorModel start = options.start;
  if (!(start.sigma2_e > 0)) start.sigma2_e = 0.1;
  start.sigma2_e = std::max(resid.squaredNorm() / static_cast<double>(resid.size()), 1e-12);
  Eigen::VectorXd t0(3);
  t0 << std::log(start.sigma2_e), std::log(start.d0_e), std::log(start.d_e);

  BestTracker tracked(objective);
  tracked(t0);
  NelderMeadOptions nm;
  nm.max_iters = options.nm_iters;
  const OptResult warm = nelder_mead(std::ref(tracked), t0, Eigen::VectorXd::Constant(3, 0.5), nm);
  QuasiNewtonOptions qn;
  qn.max_iters = options.polish_iters;
  const OptResult fin = quasi_newton(std::ref(tracked), warm.x, qn);
  if (!std::isfinite(fin.f)) throw NumericalError("fit_error_model failed to converge");

  ErrorModel out;
  out.sigma2_e = std::exp(tracked.best_x()[0]);
  out.d0_e = std::exp(tracked.best_x()[1]);
  out.d_e = std::exp(tracked.best_x()[2]);
  out.kernel = kernel;
  return out;
}

void SeismicPrior::validate() const {
  if (!(d_m > 0)) throw DomainError("d_m must be positive");
  if ((a.array() <= 0).any()) throw DomainError("truncation parameters must be positive");
  if ((gamma.array().abs() > 1).any()) throw DomainError("|gamma| must be <= 1");
  const Eigen::Matrix3d sym = 0.5 * (sigma0_m + sigma0_m.transpose());
  if ((sym - sigma0_m).cwiseAbs().maxCoeff() > 1e-10) throw DomainError("sigma0_m must be symmetric");
  if ((sigma0_m.diagonal().array() <= 0).any()) throw DomainError("sigma0_m needs positive diagonal");
  // The scaled matrix Omega Sigma0 Omega' must be a correlation matrix.
  const Eigen::Vector3d omega = sigma0_m.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::Matrix3d corr = omega.asDiagonal() * sigma0_m * omega.asDiagonal();
  if ((corr.diagonal().array() - 1).abs().maxCoeff() > 1e-10)
    throw DomainError("scaled property covariance lost its unit diagonal");
}

Eigen::VectorXd prior_mean(const SeismicPrior& prior, const Eigen::VectorXd& t) {
  const int n_t = static_cast<int>(t.size());
  Eigen::VectorXd mu(3 * n_t);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < n_t; ++i) mu[k * n_t + i] = prior.trend(0, k) + prior.trend(1, k) * t[i];
  return mu;
}

SelectionSet prior_selection_set(const SeismicPrior& prior, int n_t) {
  SelectionSet a;
  a.coords.reserve(static_cast<std::size_t>(3 * n_t));
  for (int k = 0; k < 3; ++k) {
    const CoordinateSet cs = CoordinateSet::symmetric_tails(prior.a[k]);
    for (int i = 0; i < n_t; ++i) a.coords.push_back(cs);
  }
  return a;
}

Eigen::MatrixXd prior_joint_covariance(const SeismicPrior& prior, int n_t) {
  prior.validate();
  const Eigen::MatrixXd c_m = correlation_matrix_1d(sample_positions(n_t), prior.d_m, prior.kernel);
  const Eigen::Vector3d omega = prior.sigma0_m.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::Matrix3d go = (prior.gamma.array() * omega.array()).matrix().asDiagonal();
  const Eigen::Matrix3d cross_small = prior.sigma0_m * go.transpose();
  const Eigen::Matrix3d latent_small = go * prior.sigma0_m * go.transpose();
  Eigen::Matrix3d resid_small = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) resid_small(k, k) = (1 - prior.gamma[k]) * (1 - prior.gamma[k]);

  const int p = 3 * n_t;
  Eigen::MatrixXd joint(2 * p, 2 * p);
  joint.topLeftCorner(p, p) = kron(prior.sigma0_m, c_m);
  joint.topRightCorner(p, p) = -kron(cross_small, c_m);
  joint.bottomLeftCorner(p, p) = joint.topRightCorner(p, p).transpose();
  joint.bottomRightCorner(p, p) =
      kron(resid_small, Eigen::MatrixXd::Identity(n_t, n_t)) + kron(latent_small, c_m);
  return joint;
}

double prior_log_density(const SeismicPrior& prior, const Eigen::VectorXd& stacked_logs,
                         const Eigen::VectorXd& t, UniformStream& crn, int n_mc) {
  prior.validate();
  const int n_t = static_cast<int>(t.size());
  const int p = 3 * n_t;
  if (stacked_logs.size() != p) throw DomainError("prior_log_density: log vector has wrong length");
  const Eigen::VectorXd r = stacked_logs - prior_mean(prior, t);
  const Eigen::MatrixXd c_m = correlation_matrix_1d(sample_positions(n_t), prior.d_m, prior.kernel);
  const double log_phi = kron_gauss_logpdf(r, 1.0, prior.sigma0_m, c_m);
  if (prior.is_gaussian()) return log_phi;

  const Eigen::Vector3d omega = prior.sigma0_m.diagonal().cwiseSqrt().cwiseInverse();
  double log_num = 0;
  for (int k = 0; k < 3; ++k) {
    const CoordinateSet cs = CoordinateSet::symmetric_tails(prior.a[k]);
    const double resid_var = (1 - prior.gamma[k]) * (1 - prior.gamma[k]);
    for (int i = 0; i < n_t; ++i) {
      const double cond_mean = -prior.gamma[k] * omega[k] * r[k * n_t + i];
      const double term = univariate_set_prob(cs, cond_mean, resid_var);
      if (term <= 0) return -std::numeric_limits<double>::infinity();
      log_num += std::log(term);
    }
  }

  const Eigen::MatrixXd joint = prior_joint_covariance(prior, n_t);
  const Eigen::MatrixXd latent_cov = joint.bottomRightCorner(p, p);
  const double log_denom = estimate_log_prob_crn(prior_selection_set(prior, n_t),
                                                 Eigen::VectorXd::Zero(p), latent_cov,
                                                 ShiftPolicy::automatic(), crn, n_mc);
  return log_phi + log_num - log_denom;
}

namespace {

Eigen::Matrix<double, 2, 3> ols_trend(const Eigen::MatrixXd& well_logs, const Eigen::VectorXd& t) {
  Eigen::Matrix<double, 2, 3> trend;
  const double t_bar = t.mean();
  const double denom = (t.array() - t_bar).square().sum();
  for (int k = 0; k < 3; ++k) {
    const double y_bar = well_logs.col(k).mean();
    const double slope =
        denom > 0 ? ((t.array() - t_bar) * (well_logs.col(k).array() - y_bar)).sum() / denom : 0.0;
    trend(1, k) = slope;
    trend(0, k) = y_bar - slope * t_bar;
  }
  return trend;
}

// Parameter packing for the prior fit: log d_m, log-Cholesky of sigma0_m
// (6), then for the selection model logit gamma (3) and log a (3).
Eigen::Matrix3d sigma0_from_logchol(const Eigen::VectorXd& t, int offset) {
  Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
  l(0, 0) = std::exp(t[offset + 0]);
  l(1, 0) = t[offset + 1];
  l(1, 1) = std::exp(t[offset + 2]);
  l(2, 0) = t[offset + 3];
  l(2, 1) = t[offset + 4];
  l(2, 2) = std::exp(t[offset + 5]);
  return l * l.transpose();
}

void sigma0_to_logchol(const Eigen::Matrix3d& sigma0, Eigen::VectorXd& t, int offset) {
  const Eigen::Matrix3d l = Eigen::LLT<Eigen::Matrix3d>(sigma0).matrixL();
  t[offset + 0] = std::log(l(0, 0));
  t[offset + 1] = l(1, 0);
  t[offset + 2] = std::log(l(1, 1));
  t[offset + 3] = l(2, 0);
  t[offset + 4] = l(2, 1);
  t[offset + 5] = std::log(l(2, 2));
}

}  // namespace

SeismicPrior fit_prior(const Eigen::MatrixXd& well_logs, const Eigen::VectorXd& t,
                       const PriorFitOptions& options) {
  if (well_logs.cols() != 3) throw DomainError("fit_prior: well_logs must have 3 columns");
  const int n_t = static_cast<int>(well_logs.rows());
  SeismicPrior base;
  base.trend = ols_trend(well_logs, t);

  Eigen::MatrixXd resid(n_t, 3);
  for (int k = 0; k < 3; ++k)
    resid.col(k) = well_logs.col(k).array() - (base.trend(0, k) + base.trend(1, k) * t.array());
  Eigen::VectorXd r(3 * n_t);
  for (int k = 0; k < 3; ++k) r.segment(k * n_t, n_t) = resid.col(k);

  Eigen::Matrix3d sample_cov = resid.transpose() * resid / std::max(1, n_t - 1);
  sample_cov = 0.5 * (sample_cov + sample_cov.transpose()).eval();
  sample_cov.diagonal().array() += 1e-8 * sample_cov.diagonal().mean();

  const Eigen::VectorXd pos = sample_positions(n_t);

  // Stage one: Gaussian restriction (gamma = 0), exact likelihood.
  const auto gauss_objective = [&](const Eigen::VectorXd& tv) {
    const double d_m = std::exp(tv[0]);
    const Eigen::Matrix3d s0 = sigma0_from_logchol(tv, 1);
    const Eigen::MatrixXd c_m = correlation_matrix_1d(pos, d_m, base.kernel);
    return -kron_gauss_logpdf(r, 1.0, s0, c_m);
  };
  Eigen::VectorXd g0(7);
  g0[0] = std::log(1.5);
  sigma0_to_logchol(sample_cov, g0, 1);
  BestTracker gauss_tracked(gauss_objective);
  gauss_tracked(g0);
  NelderMeadOptions nm;
  nm.max_iters = options.nm_iters;
  const OptResult gwarm = nelder_mead(std::ref(gauss_tracked), g0, Eigen::VectorXd::Constant(7, 0.3), nm);
  QuasiNewtonOptions qn;
  qn.max_iters = options.polish_iters;
  qn.param_tol = options.param_tol;
  quasi_newton(std::ref(gauss_tracked), gwarm.x, qn);

  SeismicPrior gauss_fit = base;
  gauss_fit.d_m = std::exp(gauss_tracked.best_x()[0]);
  gauss_fit.sigma0_m = sigma0_from_logchol(gauss_tracked.best_x(), 1);
  gauss_fit.gamma.setZero();
  gauss_fit.a.setConstant(0.2);
  if (options.gaussian) return gauss_fit;

  // Stage two: free couplings, Monte Carlo likelihood under a fixed stream.
  UniformStream crn(options.crn_seed,
                    static_cast<std::size_t>(3 * n_t) * static_cast<std::size_t>(options.n_mc));
  const Eigen::VectorXd stacked = r + prior_mean(base, t);  // trend is fixed after stage one
  const auto objective = [&](const Eigen::VectorXd& tv) {
    SeismicPrior p = base;
    p.d_m = std::exp(tv[0]);
    p.sigma0_m = sigma0_from_logchol(tv, 1);
    for (int k = 0; k < 3; ++k) {
      p.gamma[k] = 1.0 / (1.0 + std::exp(-tv[7 + k]));
      p.a[k] = std::exp(tv[10 + k]);
    }
    return -prior_log_density(p, stacked, t, crn, options.n_mc);
  };

  // Starts: moderate and strong couplings seeded from the Gaussian fit.
  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> couplings = {
      {Eigen::Vector3d::Constant(0.5), Eigen::Vector3d::Constant(0.15)},
      {Eigen::Vector3d(0.85, 0.85, 0.35), Eigen::Vector3d(0.12, 0.25, 0.12)},
  };
  BestTracker tracked(objective);
  for (const auto& [gammas, as] : couplings) {
    Eigen::VectorXd tv(13);
    tv[0] = std::log(gauss_fit.d_m);
    sigma0_to_logchol(gauss_fit.sigma0_m, tv, 1);
    for (int k = 0; k < 3; ++k) {
      tv[7 + k] = std::log(gammas[k] / (1 - gammas[k]));
      tv[10 + k] = std::log(as[k]);
    }
    const OptResult warm = nelder_mead(std::ref(tracked), tv, Eigen::VectorXd::Constant(13, 0.3), nm);
    quasi_newton(std::ref(tracked), warm.x, qn);
  }
  if (!std::isfinite(tracked.best_f())) throw NumericalError("fit_prior failed to converge");

  SeismicPrior out = base;
  const Eigen::VectorXd& bx = tracked.best_x();
  out.d_m = std::exp(bx[0]);
  out.sigma0_m = sigma0_from_logchol(bx, 1);
  for (int k = 0; k < 3; ++k) {
    out.gamma[k] = 1.0 / (1.0 + std::exp(-bx[7 + k]));
    out.a[k] = std::exp(bx[10 + k]);
  }
  return out;
}

namespace {

// Draws of the first block of a joint (properties, latent) law with the
// latent block confined to A. One Gaussian conditional draw per kept chain
// state.
SampleBatch sample_block_given_latent(const GaussianSpec& joint, int p, int q, const SelectionSet& a,
                                      const McmcConfig& mcmc, std::uint64_t seed) {
  std::vector<int> latent_idx(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) latent_idx[static_cast<std::size_t>(i)] = p + i;
  const GaussianSpec latent = marginal(joint, latent_idx);
  SampleBatch batch = run_chain(a, latent.mean(), latent.cov(), mcmc, derive_seed(seed, 0));

  Eigen::MatrixXd cross(p, q);
  Eigen::MatrixXd s_mm(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) cross(i, j) = joint.cov()(i, p + j);
    for (int j = 0; j < p; ++j) s_mm(i, j) = joint.cov()(i, j);
  }
  const CholFactor f_lat = CholFactor::compute(latent.cov());
  const Eigen::MatrixXd gain = f_lat.solve(Eigen::MatrixXd(cross.transpose())).transpose();
  Eigen::MatrixXd cond_cov = s_mm - gain * cross.transpose();
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();
  const Eigen::MatrixXd l_cond = CholFactor::compute(cond_cov).matrix_l();

  Rng rng(derive_seed(seed, 1));
  Eigen::MatrixXd out(batch.samples.rows(), p);
  Eigen::VectorXd noise(p);
  const Eigen::VectorXd mu_m = joint.mean().head(p);
  for (Eigen::Index k = 0; k < batch.samples.rows(); ++k) {
    for (int i = 0; i < p; ++i) noise[i] = rng.normal();
    out.row(k) = (mu_m + gain * (batch.samples.row(k).transpose() - latent.mean()) +
                  l_cond.triangularView<Eigen::Lower>() * noise)
                     .transpose();
  }
  batch.samples = std::move(out);
  return batch;
}

}  // namespace

SampleBatch prior_sample(const SeismicPrior& prior, const Eigen::VectorXd& t, const McmcConfig& mcmc,
                         std::uint64_t seed) {
  const int n_t = static_cast<int>(t.size());
  const int p = 3 * n_t;
  Eigen::VectorXd mean(2 * p);
  mean.head(p) = prior_mean(prior, t);
  mean.tail(p).setZero();
  GaussianSpec joint(std::move(mean), prior_joint_covariance(prior, n_t));
  return sample_block_given_latent(joint, p, p, prior_selection_set(prior, n_t), mcmc, seed);
}

SampleBatch posterior_sample(const AvoDataset& data, const SeismicPrior& prior,
                             const ErrorModel& error_model, const ForwardOperator& fwd,
                             const McmcConfig& mcmc, std::uint64_t seed) {
  data.validate();
  prior.validate();
  const int n_t = data.n_t();
  const int p = 3 * n_t;
  const int nd = data.n_angles() * n_t;
  if (fwd.n_t != n_t) throw DomainError("posterior_sample: forward operator size mismatch");

  const Eigen::VectorXd mu_m = prior_mean(prior, data.t());
  const Eigen::MatrixXd prior_cov = prior_joint_covariance(prior, n_t);
  const Eigen::MatrixXd sigma_e = error_covariance(error_model, data.angles_deg, n_t);

  Eigen::VectorXd mean(2 * p + nd);
  mean.head(p) = mu_m;
  mean.segment(p, p).setZero();
  mean.tail(nd) = fwd.g * mu_m;

  const Eigen::MatrixXd s1 = prior_cov.topLeftCorner(p, p);
  const Eigen::MatrixXd s12 = prior_cov.topRightCorner(p, p);
  Eigen::MatrixXd cov(2 * p + nd, 2 * p + nd);
  cov.topLeftCorner(2 * p, 2 * p) = prior_cov;
  cov.block(0, 2 * p, p, nd) = s1 * fwd.g.transpose();
  cov.block(p, 2 * p, p, nd) = s12.transpose() * fwd.g.transpose();
  cov.block(2 * p, 0, nd, p) = cov.block(0, 2 * p, p, nd).transpose();
  cov.block(2 * p, p, nd, p) = cov.block(p, 2 * p, p, nd).transpose();
  cov.bottomRightCorner(nd, nd) = fwd.g * s1 * fwd.g.transpose() + sigma_e;
  cov = 0.5 * (cov + cov.transpose()).eval();

  GaussianSpec joint(std::move(mean), std::move(cov));
  std::vector<int> d_idx(static_cast<std::size_t>(nd));
  for (int i = 0; i < nd; ++i) d_idx[static_cast<std::size_t>(i)] = 2 * p + i;
  const GaussianSpec given_d = condition(joint, d_idx, data.stacked_data());
  return sample_block_given_latent(given_d, p, p, prior_selection_set(prior, n_t), mcmc, seed);
}

InversionReport summarize_inversion(const SampleBatch& posterior, const SampleBatch& prior,
                                    const Eigen::MatrixXd& well_logs, double level) {
  if (!(level > 0 && level < 1)) throw DomainError("summarize_inversion: level must lie in (0,1)");
  const int n_t = static_cast<int>(well_logs.rows());
  const double lo_q = (1 - level) / 2;
  const double hi_q = 1 - lo_q;
  InversionReport report;
  report.level = level;
  for (int k = 0; k < 3; ++k) {
    PropertyReport pr;
    double mse = 0;
    int post_hits = 0, prior_hits = 0;
    for (int i = 0; i < n_t; ++i) {
      const int col = k * n_t + i;
      const Eigen::VectorXd post_col = posterior.samples.col(col);
      const double mean = post_col.mean();
      mse += (mean - well_logs(i, k)) * (mean - well_logs(i, k));
      if (well_logs(i, k) >= empirical_quantile(post_col, lo_q) &&
          well_logs(i, k) <= empirical_quantile(post_col, hi_q))
        ++post_hits;
      if (prior.samples.size() > 0) {
        const Eigen::VectorXd prior_col = prior.samples.col(col);
        if (well_logs(i, k) >= empirical_quantile(prior_col, lo_q) &&
            well_logs(i, k) <= empirical_quantile(prior_col, hi_q))
          ++prior_hits;
      }
    }
    pr.mse = mse / n_t;
    pr.posterior_coverage = static_cast<double>(post_hits) / n_t;
    pr.prior_coverage = prior.samples.size() > 0 ? static_cast<double>(prior_hits) / n_t : 0.0;
    report.props[static_cast<std::size_t>(k)] = pr;
  }
  return report;
}

SeismicPrior demo_selection_prior() {
  SeismicPrior p;
  p.trend << -0.1, -0.95, 0.41, 0.0005, 0.0006, 0.0002;
  p.sigma0_m << 0.0073, 0.0126, -0.0013, 0.0126, 0.0250, -0.0039, -0.0013, -0.0039, 0.0018;
  p.d_m = 1.61;
  p.a << 0.1110, 0.2619, 0.1151;
  p.gamma << 0.8656, 0.9061, 0.3331;
  return p;
}

SeismicPrior demo_gaussian_prior() {
  SeismicPrior p;
  p.trend << -0.1, -0.95, 0.41, 0.0005, 0.0006, 0.0002;
  p.sigma0_m << 0.0059, 0.0093, -0.0007, 0.0093, 0.0195, -0.0025, -0.0007, -0.0025, 0.0016;
  p.d_m = 1.53;
  p.a.setConstant(0.1);
  p.gamma.setZero();
  return p;
}

ErrorModel demo_error_model() {
  ErrorModel e;
  e.sigma2_e = 0.402;
  e.d0_e = 7.3;
  e.d_e = 11.1;
  return e;
}

AvoDataset make_demo_dataset(const DemoConfig& config) {
  AvoDataset data;
  data.dt = config.dt;
  data.t0 = config.t0;
  data.angles_deg = config.angles_deg;
  for (Eigen::Index a = 0; a < config.angles_deg.size(); ++a)
    data.wavelets.push_back(
        ricker_wavelet(config.peak_freq_hz[a], config.dt, config.wavelet_half_length));

  Eigen::VectorXd t(config.n_t);
  for (int i = 0; i < config.n_t; ++i) t[i] = config.t0 + i * config.dt;

  McmcConfig mcmc;
  mcmc.n_iter = 4000;
  mcmc.burn_in = 3999;  // single kept draw after a long warm-up
  const SampleBatch truth = prior_sample(config.prior, t, mcmc, derive_seed(config.seed, 11));
  const Eigen::VectorXd m = truth.samples.row(truth.samples.rows() - 1).transpose();

  data.well_logs.resize(config.n_t, 3);
  for (int k = 0; k < 3; ++k) data.well_logs.col(k) = m.segment(k * config.n_t, config.n_t);

  const ForwardOperator fwd =
      build_forward(data.wavelets, data.angles_deg, config.vsvp_ratio, config.n_t);
  const Eigen::MatrixXd sigma_e = error_covariance(config.noise, data.angles_deg, config.n_t);
  const Eigen::MatrixXd l_e = CholFactor::compute(sigma_e).matrix_l();
  Rng rng(derive_seed(config.seed, 12));
  Eigen::VectorXd noise(sigma_e.rows());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
  const Eigen::VectorXd d = fwd.g * m + l_e.triangularView<Eigen::Lower>() * noise;

  data.traces.resize(config.n_t, data.n_angles());
  for (int a = 0; a < data.n_angles(); ++a) data.traces.col(a) = d.segment(a * config.n_t, config.n_t);
  data.validate();
  return data;
}

}  // namespace selgauss
