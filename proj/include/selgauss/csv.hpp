#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace selgauss {

// Shortest decimal that round-trips the double exactly; keeps CSV output
// byte-stable across runs.
std::string format_double(double v);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});

// Row-major numeric CSV; a leading non-numeric row is treated as a header.
Eigen::MatrixXd read_matrix_csv(const std::string& path, std::vector<std::string>* header = nullptr);

Eigen::VectorXd read_vector_csv(const std::string& path);

}  // namespace selgauss
