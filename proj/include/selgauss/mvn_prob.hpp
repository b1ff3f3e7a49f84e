#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>

#include "selgauss/gaussian.hpp"
#include "selgauss/interval_set.hpp"
#include "selgauss/rng.hpp"

namespace selgauss {

struct ProbEstimate {
  double value = 0;
  double log_value = -std::numeric_limits<double>::infinity();
  double std_error = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

// Mean shift of the importance function. AUTO picks, per coordinate, the
// midpoint of the interval nearest to mu_i in marginal-sd units (finite
// endpoint moved one sd inward when the interval is unbounded) and zero when
// the set is symmetric about mu_i, where a shift buys nothing.
class ShiftPolicy {
 public:
  static ShiftPolicy automatic() { return ShiftPolicy(Mode::kAuto); }
  static ShiftPolicy zero() { return ShiftPolicy(Mode::kZero); }
  static ShiftPolicy explicit_shift(Eigen::VectorXd eta);

  Eigen::VectorXd resolve(const SelectionSet& a, const Eigen::VectorXd& mu,
                          const Eigen::MatrixXd& sigma) const;

 private:
  enum class Mode { kAuto, kZero, kExplicit };
  explicit ShiftPolicy(Mode m) : mode_(m) {}
  Mode mode_;
  Eigen::VectorXd eta_;
};

// Sequential-conditioning importance sampler for Phi_n(A; mu, Sigma) over
// product interval-union sets. Coordinates are visited in natural order; each
// is drawn from its truncated normal conditional (one uniform per
// coordinate), and the weight collects the conditional set probabilities
// times the shifted-density ratio. The estimate is the sample mean of the
// weights. Deterministic for fixed (inputs, seed, n_samples).
ProbEstimate estimate_prob(const SelectionSet& a, const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& sigma, const ShiftPolicy& shift, int n_samples,
                           std::uint64_t seed);

// Same estimator driven by a fixed uniform stream: the stream is rewound on
// entry, so repeated calls see identical uniforms and log Phi-hat becomes a
// deterministic, continuous function of (mu, Sigma, set parameters).
// Consumes exactly dim(A) * n_samples uniforms.
double estimate_log_prob_crn(const SelectionSet& a, const Eigen::VectorXd& mu,
                             const Eigen::MatrixXd& sigma, const ShiftPolicy& shift,
                             UniformStream& crn, int n_samples);

}  // namespace selgauss
