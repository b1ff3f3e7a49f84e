#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selgauss/errors.hpp"

namespace selgauss {

class Rng;

// Closed interval with extended-real endpoints. Membership at endpoints is
// inclusive; the endpoint convention is measure-zero but fixed for
// determinism.
struct Interval {
  double lo = 0;
  double hi = 0;
};

// Finite union of closed intervals on one coordinate, kept in canonical form:
// sorted ascending, pairwise disjoint, touching intervals merged. Standard
// normal measures per interval are precomputed so repeated probability
// queries against the N(0,1) reference are table lookups.
class CoordinateSet {
 public:
  static CoordinateSet normalize(std::vector<Interval> intervals);
  static CoordinateSet whole_line();
  // (-inf,-a] U [a,inf)
  static CoordinateSet symmetric_tails(double a);

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool is_whole_line() const;

  // Total / per-interval N(0,1) measure.
  double std_measure() const { return total_std_measure_; }
  double std_measure(std::size_t k) const { return std_measure_[k]; }

  CoordinateSet reflected(double center) const;
  bool symmetric_about(double center, double tol = 1e-12) const;

  bool operator==(const CoordinateSet& other) const;

 private:
  CoordinateSet() = default;
  std::vector<Interval> intervals_;
  std::vector<double> std_measure_;
  double total_std_measure_ = 0;
};

bool contains(const CoordinateSet& cs, double x);

// Phi_1(cs; mean, var): normal measure of the union. var = 0 degenerates to a
// point-mass membership check.
double univariate_set_prob(const CoordinateSet& cs, double mean, double var);

// Inverse-CDF map of a uniform u in (0,1) through the normal restricted to
// cs. Exact draw; continuous in (mean, var, cs endpoints) for almost every u,
// which is what common-random-number likelihoods rely on.
double truncated_quantile(const CoordinateSet& cs, double mean, double var, double u);

double sample_truncated_univariate(const CoordinateSet& cs, double mean, double var, Rng& rng);

// Nearest feasible point heuristic: mean itself when feasible, otherwise the
// midpoint of the nearest bounded interval, or the finite endpoint moved one
// sd into the nearest unbounded interval. Ties break toward the positive
// side.
double nearest_feasible_point(const CoordinateSet& cs, double mean, double sd);

// Textual syntax, e.g. "(-inf,-0.3]U[0.3,inf)". Parsing is bracket-agnostic
// (all intervals are closed); formatting uses '['/']' at finite endpoints and
// '('/')' at infinite ones. parse(to_string(cs)) == cs.
CoordinateSet parse_coordinate_set(std::string_view text);
std::string to_string(const CoordinateSet& cs);

// Product region A = A_1 x ... x A_q; membership decomposes coordinate-wise.
struct SelectionSet {
  std::vector<CoordinateSet> coords;

  static SelectionSet repeated(const CoordinateSet& cs, std::size_t q);

  std::size_t dim() const { return coords.size(); }
  bool contains_point(std::span<const double> x) const;
};

}  // namespace selgauss
