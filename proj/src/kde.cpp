#include "selgauss/kde.hpp"

#include <algorithm>
#include <cmath>

#include "selgauss/errors.hpp"
#include "selgauss/normal.hpp"

namespace selgauss {

namespace {

Eigen::VectorXd sorted_copy(const Eigen::VectorXd& v) {
  Eigen::VectorXd s = v;
  std::sort(s.data(), s.data() + s.size());
  return s;
}

}  // namespace

double empirical_quantile(const Eigen::VectorXd& samples, double q) {
  if (samples.size() == 0) throw DomainError("quantile of empty sample");
  if (!(q >= 0 && q <= 1)) throw DomainError("quantile level must be in [0,1]");
  const Eigen::VectorXd s = sorted_copy(samples);
  const double h = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, s.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1 - w) * s[lo] + w * s[hi];
}

double silverman_bandwidth(const Eigen::VectorXd& samples) {
  const Eigen::Index n = samples.size();
  if (n < 2) return 0;
  const double mean = samples.mean();
  const double sd = std::sqrt((samples.array() - mean).square().sum() / static_cast<double>(n - 1));
  const double iqr = empirical_quantile(samples, 0.75) - empirical_quantile(samples, 0.25);
  double spread = sd;
  if (iqr > 0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double kde_density(const Eigen::VectorXd& samples, double bandwidth, double x) {
  if (samples.size() == 0) throw DomainError("kde of empty sample");
  if (!(bandwidth > 0)) throw DomainError("kde bandwidth must be positive");
  double acc = 0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) acc += norm_pdf((x - samples[i]) / bandwidth);
  return acc / (static_cast<double>(samples.size()) * bandwidth);
}

Eigen::VectorXd kde_curve(const Eigen::VectorXd& samples, double bandwidth, const Eigen::VectorXd& grid) {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) out[g] = kde_density(samples, bandwidth, grid[g]);
  return out;
}

namespace {

Eigen::VectorXd range_grid(const Eigen::VectorXd& samples, int grid_points) {
  const double lo = samples.minCoeff();
  const double hi = samples.maxCoeff();
  Eigen::VectorXd grid(grid_points);
  for (int g = 0; g < grid_points; ++g)
    grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
  return grid;
}

}  // namespace

double kde_mode(const Eigen::VectorXd& samples, int grid_points) {
  if (samples.size() == 0) throw DomainError("kde_mode of empty sample");
  const double h = silverman_bandwidth(samples);
  if (!(h > 0) || samples.maxCoeff() == samples.minCoeff()) return samples[0];
  const Eigen::VectorXd grid = range_grid(samples, grid_points);
  const Eigen::VectorXd dens = kde_curve(samples, h, grid);
  Eigen::Index best = 0;
  dens.maxCoeff(&best);
  return grid[best];
}

std::vector<double> kde_mode_locations(const Eigen::VectorXd& samples, int grid_points,
                                       double min_prominence_rel) {
  if (samples.size() == 0) throw DomainError("kde_mode_locations of empty sample");
  const double h = silverman_bandwidth(samples);
  if (!(h > 0) || samples.maxCoeff() == samples.minCoeff()) return {samples[0]};
  const Eigen::VectorXd grid = range_grid(samples, grid_points);
  const Eigen::VectorXd v = kde_curve(samples, h, grid);
  const double vmax = v.maxCoeff();

  std::vector<double> modes;
  for (int i = 0; i < grid_points; ++i) {
    const double left = i > 0 ? v[i - 1] : -1;
    const double right = i + 1 < grid_points ? v[i + 1] : -1;
    if (!(v[i] > left && v[i] >= right)) continue;
    // Topographic prominence: walk to the nearest higher ground on each side,
    // tracking the lowest saddle crossed.
    double saddle = -1;
    bool higher_found = false;
    for (int dir : {-1, +1}) {
      double low = v[i];
      for (int j = i + dir; j >= 0 && j < grid_points; j += dir) {
        low = std::min(low, v[j]);
        if (v[j] > v[i]) {
          saddle = std::max(saddle, low);
          higher_found = true;
          break;
        }
      }
    }
    const double prominence = higher_found ? v[i] - saddle : v[i] - v.minCoeff();
    if (prominence >= min_prominence_rel * vmax) modes.push_back(grid[i]);
  }
  return modes;
}

}  // namespace selgauss
