#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "selgauss/gaussian.hpp"
#include "selgauss/interval_set.hpp"
#include "selgauss/trunc_sampler.hpp"

namespace selgauss {

// Sampled wavelet kernel: weight at each integer lag (in samples).
struct Wavelet {
  Eigen::VectorXi lags;
  Eigen::VectorXd weights;
};

Wavelet ricker_wavelet(double peak_freq_hz, double dt_ms, int half_length);

// AVO traces with the colocated well log. Properties are stacked
// property-major (all log v_p, then log v_s, then log rho); data angle-major.
struct AvoDataset {
  Eigen::VectorXd angles_deg;
  Eigen::MatrixXd traces;     // n_t x n_angles
  double dt = 4.0;            // ms
  double t0 = 1900.0;         // ms
  Eigen::MatrixXd well_logs;  // n_t x 3
  std::vector<Wavelet> wavelets;

  int n_t() const { return static_cast<int>(well_logs.rows()); }
  int n_angles() const { return static_cast<int>(angles_deg.size()); }
  Eigen::VectorXd t() const;
  Eigen::VectorXd stacked_data() const;
  Eigen::VectorXd stacked_logs() const;
  void validate() const;
};

// Directory layout: well.csv (t,log_vp,log_vs,log_rho), seismic.csv
// (t,amp_<angle>...), wavelet_<angle>.csv (lag,weight).
AvoDataset load_avo_dataset(const std::string& dir);
void save_avo_dataset(const AvoDataset& data, const std::string& dir);

// Convolutional weak-contrast forward map G = W * A * D: per-angle
// convolution, angle-dependent reflectivity coefficients on contrasts of the
// log properties, and forward differencing with a zero top boundary row (the
// boundary carries no reflectivity, and constants are annihilated).
struct ForwardOperator {
  Eigen::MatrixXd w, a_coef, d, g;
  int n_t = 0;
  Eigen::VectorXd angles_deg;
  double vsvp_ratio = 0.5;
};

ForwardOperator build_forward(const std::vector<Wavelet>& wavelets, const Eigen::VectorXd& angles_deg,
                              double vsvp_ratio, int n_t);

// Noise covariance sigma2 * C0(angles) (x) C(time); angle distances in
// degrees, time distances in samples.
struct ErrorModel {
  double sigma2_e = 0.1;
  double d0_e = 5;
  double d_e = 5;
  Kernel kernel = Kernel::gauss;
};

Eigen::MatrixXd error_covariance(const ErrorModel& model, const Eigen::VectorXd& angles_deg, int n_t);

struct ErrorFitOptions {
  int nm_iters = 120;
  int polish_iters = 40;
  ErrorModel start{};
};

// Maximizes the Gaussian likelihood of d - G m_w over (sigma2_e, d0_e, d_e).
ErrorModel fit_error_model(const AvoDataset& data, const ForwardOperator& fwd,
                           const ErrorFitOptions& options = {});

// Multivariate selection prior for the stacked properties: per-property
// linear trends, cross-property covariance, shared time correlation,
// symmetric +-a selection sets, and per-property couplings.
struct SeismicPrior {
  Eigen::Matrix<double, 2, 3> trend = Eigen::Matrix<double, 2, 3>::Zero();  // intercept, slope
  Eigen::Matrix3d sigma0_m = Eigen::Matrix3d::Identity();
  double d_m = 2;
  Eigen::Vector3d a = Eigen::Vector3d::Constant(0.2);
  Eigen::Vector3d gamma = Eigen::Vector3d::Zero();
  Kernel kernel = Kernel::gauss;

  void validate() const;
  bool is_gaussian() const { return gamma.cwiseAbs().maxCoeff() == 0.0; }
};

Eigen::VectorXd prior_mean(const SeismicPrior& prior, const Eigen::VectorXd& t);
SelectionSet prior_selection_set(const SeismicPrior& prior, int n_t);

// Joint covariance of (properties, latent block), 6*n_t square, with the
// negative cross blocks of the multivariate coupling construction.
Eigen::MatrixXd prior_joint_covariance(const SeismicPrior& prior, int n_t);

// Log prior density of the stacked well logs. The conditional covariance of
// the latent block given the properties is diagonal, so the numerator
// factorizes into univariate set probabilities; the normalizer runs through
// the common-random-number estimator. Exact Gaussian when gamma = 0.
double prior_log_density(const SeismicPrior& prior, const Eigen::VectorXd& stacked_logs,
                         const Eigen::VectorXd& t, UniformStream& crn, int n_mc);

struct PriorFitOptions {
  bool gaussian = false;  // restrict gamma = 0 (Gaussian benchmark prior)
  int n_mc = 5000;
  std::uint64_t crn_seed = 424243;
  int nm_iters = 200;
  int polish_iters = 40;
  double param_tol = 1e-5;
};

// Two-stage fit, prior side: ordinary least squares removes the linear
// trends, then the residuals are fitted by Monte Carlo maximum likelihood
// (exact likelihood in the Gaussian restriction).
SeismicPrior fit_prior(const Eigen::MatrixXd& well_logs, const Eigen::VectorXd& t,
                       const PriorFitOptions& options = {});

SampleBatch prior_sample(const SeismicPrior& prior, const Eigen::VectorXd& t,
                         const McmcConfig& mcmc, std::uint64_t seed);

// Posterior draws of the stacked properties given the traces: the joint
// Gaussian of (m, latent, d) is conditioned on d, the latent block is run
// through the truncated chain, and m is drawn from its Gaussian conditional
// per kept draw.
SampleBatch posterior_sample(const AvoDataset& data, const SeismicPrior& prior,
                             const ErrorModel& error_model, const ForwardOperator& fwd,
                             const McmcConfig& mcmc, std::uint64_t seed);

struct PropertyReport {
  double mse = 0;
  double prior_coverage = 0;
  double posterior_coverage = 0;
};

struct InversionReport {
  double level = 0.8;
  std::array<PropertyReport, 3> props;
};

InversionReport summarize_inversion(const SampleBatch& posterior, const SampleBatch& prior,
                                    const Eigen::MatrixXd& well_logs, double level = 0.8);

// Fitted parameter bundles for the bundled demo generator and regression
// baselines.
SeismicPrior demo_selection_prior();
SeismicPrior demo_gaussian_prior();
ErrorModel demo_error_model();

struct DemoConfig {
  int n_t = 55;
  double dt = 4;
  double t0 = 1900;
  Eigen::VectorXd angles_deg = (Eigen::VectorXd(3) << 12, 22, 31).finished();
  Eigen::VectorXd peak_freq_hz = (Eigen::VectorXd(3) << 30, 25, 20).finished();
  int wavelet_half_length = 12;
  double vsvp_ratio = 0.5;
  SeismicPrior prior = demo_selection_prior();
  ErrorModel noise = demo_error_model();
  std::uint64_t seed = 1;
};

// Synthetic stand-in for a real survey: truth drawn from the prior, data
// through the forward model with correlated noise, logs = truth.
AvoDataset make_demo_dataset(const DemoConfig& config);

}  // namespace selgauss
