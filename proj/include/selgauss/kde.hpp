#pragma once

#include <Eigen/Dense>
#include <vector>

namespace selgauss {

// Silverman's rule of thumb: 0.9 min(sd, iqr/1.34) n^(-1/5).
double silverman_bandwidth(const Eigen::VectorXd& samples);

double kde_density(const Eigen::VectorXd& samples, double bandwidth, double x);

Eigen::VectorXd kde_curve(const Eigen::VectorXd& samples, double bandwidth, const Eigen::VectorXd& grid);

// Argmax of the Gaussian KDE over an equally spaced grid across the sample
// range (512 points by default).
double kde_mode(const Eigen::VectorXd& samples, int grid_points = 512);

// Locations of KDE local maxima with topographic prominence of at least
// min_prominence_rel times the global maximum.
std::vector<double> kde_mode_locations(const Eigen::VectorXd& samples, int grid_points = 512,
                                       double min_prominence_rel = 0.05);

// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(const Eigen::VectorXd& samples, double q);

}  // namespace selgauss
