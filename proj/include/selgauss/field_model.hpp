#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "selgauss/gaussian.hpp"
#include "selgauss/interval_set.hpp"
#include "selgauss/mvn_prob.hpp"
#include "selgauss/trunc_sampler.hpp"

namespace selgauss {

// Regular grid, unit spacing. 2-D sites map (row, col) -> (x1, x2) = (col, row)
// so d_h acts along columns and d_v along rows; 1-D grids run along x1.
class GridLayout {
 public:
  static GridLayout line(int n);
  static GridLayout grid(int rows, int cols);

  int size() const { return rows_ * cols_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_1d() const { return rows_ == 1; }
  int index(int r, int c) const { return r * cols_ + c; }
  int center_index() const { return index(rows_ / 2, cols_ / 2); }
  const std::vector<Point2>& sites() const { return sites_; }

 private:
  GridLayout(int rows, int cols);
  int rows_ = 0, cols_ = 0;
  std::vector<Point2> sites_;
};

// Stationary field parameters: location, scale, coupling, correlation ranges,
// and the per-site selection set template (identical at every site, q = p).
struct FieldParams {
  double mu = 0;
  double sigma2 = 1;
  double gamma = 0;
  CorrelationModel corr;
  CoordinateSet set_template = CoordinateSet::whole_line();

  void validate() const;
  bool truncated_limit() const { return std::abs(gamma) == 1.0; }
};

SelectionSet selection_set(const FieldParams& params, const GridLayout& grid);

// (1 - g^2) I + g^2 C: covariance of the latent block that gets restricted to A.
Eigen::MatrixXd latent_covariance(const FieldParams& params, const Eigen::MatrixXd& c);

struct DensityOptions {
  int n_mc = 5000;
  std::uint64_t crn_seed = 0x5e1ec7;
  ShiftPolicy shift = ShiftPolicy::automatic();
};

// Unconditional realizations, one per row. Latent draws come from the
// truncated-normal chain; each kept draw is pushed through the conditional
// mean map with an independent Gaussian residual. |gamma| = 1 degenerates to
// the truncated field with no residual.
Eigen::MatrixXd simulate(const FieldParams& params, const GridLayout& grid, const McmcConfig& mcmc,
                         int n_real, std::uint64_t seed);

// Log density of one field configuration. The selection factor cancels
// exactly at gamma = 0 (pure Gaussian), and |gamma| = 1 takes the
// truncated-Gaussian limit since the factorized form is undefined there.
double log_density(const FieldParams& params, const GridLayout& grid, const Eigen::VectorXd& x,
                   UniformStream& crn, int n_mc, const ShiftPolicy& shift = ShiftPolicy::automatic());
double log_density(const FieldParams& params, const GridLayout& grid, const Eigen::VectorXd& x,
                   const DensityOptions& opts = {});

// Joint law of (unobserved sites, latent block) given exact observations.
// The selection set is untouched by conditioning on field values.
struct ConditionalFieldSpec {
  GaussianSpec joint;
  SelectionSet a;
  std::vector<int> obs_sites;
  Eigen::VectorXd obs_values;
  std::vector<int> unobs_sites;
  int n_sites = 0;
  int q = 0;

  int n_unobs() const { return static_cast<int>(unobs_sites.size()); }
};

ConditionalFieldSpec condition_exact(const FieldParams& params, const GridLayout& grid,
                                     std::span<const int> obs_sites,
                                     const Eigen::VectorXd& obs_values);

// Draws of the full field honoring the observations exactly (kept draws x
// n_sites). Latent draws come from the chain on the conditioned latent block;
// unobserved sites are drawn from their Gaussian conditional per kept draw.
Eigen::MatrixXd conditional_simulate(const ConditionalFieldSpec& spec, const McmcConfig& mcmc,
                                     std::uint64_t seed);

struct PredictionSummary {
  Eigen::VectorXd mean, median, mode, lower, upper;
  double lower_level = 0.1;
  double upper_level = 0.9;
  int n_draws = 0;
};

// Per-site mean / median / KDE-mode / empirical quantiles over conditional
// draws. Requires at least 1000 kept draws.
PredictionSummary predict(const ConditionalFieldSpec& spec, const McmcConfig& mcmc,
                          std::uint64_t seed, double lower_level = 0.1, double upper_level = 0.9);

PredictionSummary summarize_draws(const Eigen::MatrixXd& draws, double lower_level = 0.1,
                                  double upper_level = 0.9);

// Moment-matched Gaussian benchmark: empirical mean and covariance over
// simulated realizations, symmetrized.
GaussianSpec gaussian_match(const FieldParams& params, const GridLayout& grid, int n_real,
                            std::uint64_t seed);

// Chain length needed to keep n_real draws under the config's burn-in/thin.
McmcConfig resolve_for_kept(const McmcConfig& mcmc, long n_keep);

}  // namespace selgauss
