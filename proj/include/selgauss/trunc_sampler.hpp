#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "selgauss/gaussian.hpp"
#include "selgauss/interval_set.hpp"
#include "selgauss/rng.hpp"

namespace selgauss {

struct McmcConfig {
  long n_iter = 20000;
  long burn_in = -1;   // default n_iter / 5
  int thin = 1;
  int block_size = -1;  // default min(100, n)

  long resolved_burn_in() const { return burn_in >= 0 ? burn_in : n_iter / 5; }
};

// Precomputed machinery for the block-proposal Metropolis-Hastings sampler on
// a normal restricted to a product interval-union set. Each eligible anchor
// owns a block: the block_size coordinates most correlated with it (by
// absolute correlation), with the conditional factor of the block given its
// complement cached once. Anchors sit on a regular sublattice with roughly
// 2x neighborhood overlap so coordinate update rates stay approximately
// even; uncovered coordinates are added as extra anchors.
class BlockPlan {
 public:
  explicit BlockPlan(const Eigen::MatrixXd& sigma, int block_size = -1);

  struct Block {
    int anchor = 0;
    std::vector<int> idx;      // ascending
    Eigen::MatrixXd q_aa;      // precision subblock
    Eigen::MatrixXd l_cond;    // lower Cholesky of q_aa^{-1}
  };

  int dim() const { return static_cast<int>(marginal_sd_.size()); }
  int block_size() const { return block_size_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::VectorXd& marginal_sd() const { return marginal_sd_; }
  // Per-coordinate count of neighborhoods containing it; >= 1 everywhere.
  const std::vector<int>& coverage() const { return coverage_; }

 private:
  int block_size_ = 0;
  Eigen::MatrixXd precision_;
  Eigen::VectorXd marginal_sd_;
  std::vector<Block> blocks_;
  std::vector<int> coverage_;
};

// Coordinate-wise feasible start: mu_i when feasible, otherwise midpoint of
// the nearest bounded interval or finite endpoint one marginal sd into the
// nearest unbounded interval; ties break positive.
Eigen::VectorXd initialize_feasible(const SelectionSet& a, const Eigen::VectorXd& mu,
                                    const Eigen::MatrixXd& sigma);

struct BlockProposal {
  Eigen::VectorXd values;       // proposed block coordinates, block order
  double log_weight_new = 0;    // sum log Phi_1 along the proposed path
  double log_weight_old = 0;    // same along the current configuration
  bool underflow = false;       // conditional set probability underflowed
};

// Sequential truncated-normal proposal for one block given the complement
// fixed at the current state. The two log weights are the numerator and
// denominator paths of the acceptance ratio.
BlockProposal propose_block(const Eigen::VectorXd& x, const BlockPlan& plan, int block_index,
                            const SelectionSet& a, const Eigen::VectorXd& mu, Rng& rng);

struct SampleBatch {
  Eigen::MatrixXd samples;  // kept draws x dim
  long burn_in = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  double acceptance_rate = 0;
  std::vector<unsigned char> accept_trace;  // one flag per iteration
  long underflow_rejects = 0;
};

SampleBatch run_chain(const SelectionSet& a, const Eigen::VectorXd& mu, const BlockPlan& plan,
                      const McmcConfig& config, std::uint64_t seed);

SampleBatch run_chain(const SelectionSet& a, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                      const McmcConfig& config, std::uint64_t seed);

}  // namespace selgauss
