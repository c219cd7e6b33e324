#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seqcfa {

/// Observations in rows, named variables in columns. All entries finite.
class DataMatrix {
 public:
  DataMatrix() = default;
  /// Throws DataError on non-finite values, fewer than two rows, or duplicate names.
  DataMatrix(Eigen::MatrixXd values, std::vector<std::string> column_names);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  Eigen::Index n_obs() const noexcept { return values_.rows(); }
  Eigen::Index n_vars() const noexcept { return values_.cols(); }

  bool has_column(std::string_view name) const;
  Eigen::Index column_index(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
  /// Columns in the requested order; throws DataError naming the first missing one.
  DataMatrix select(const std::vector<std::string>& names) const;

  /// FNV-1a over the raw bytes of values and names.
  std::uint64_t checksum() const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

/// Unbiased (divisor n - 1) covariance. Throws DataError naming any zero-variance column.
Eigen::MatrixXd sample_covariance(const DataMatrix& data);

/// Subtracts column means.
Eigen::MatrixXd center_columns(const Eigen::MatrixXd& values);

}  // namespace seqcfa
