#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seqcfa/data.hpp"

namespace testutil {

/// n draws from N(0, sigma), columns named as given.
inline seqcfa::DataMatrix draw_normal(const Eigen::MatrixXd& sigma, int n, std::uint64_t seed,
                                      std::vector<std::string> names) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::MatrixXd l = sigma.llt().matrixL();
  Eigen::MatrixXd x(n, sigma.rows());
  for (int r = 0; r < n; ++r) {
    Eigen::VectorXd e(sigma.rows());
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = z(rng);
    x.row(r) = (l * e).transpose();
  }
  return seqcfa::DataMatrix(std::move(x), std::move(names));
}

inline std::vector<std::string> names(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("seqcfa_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double skewness(const Eigen::VectorXd& v) {
  const Eigen::ArrayXd c = v.array() - v.mean();
  const double m2 = c.square().mean();
  const double m3 = c.cube().mean();
  return m3 / std::pow(m2, 1.5);
}

}  // namespace testutil
