#include "seqcfa/data.hpp"

#include <algorithm>
#include <cstring>
#include <set>

#include "seqcfa/error.hpp"

namespace seqcfa {

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::vector<std::string> column_names)
    : values_(std::move(values)), names_(std::move(column_names)) {
  if (values_.cols() != static_cast<Eigen::Index>(names_.size()))
    throw DataError("column name count does not match data width");
  if (values_.rows() < 2) throw DataError("at least two observations are required");
  std::set<std::string> seen;
  for (const auto& n : names_)
    if (!seen.insert(n).second) throw DataError("duplicate column name '" + n + "'");
  if (!values_.allFinite()) throw DataError("data contain non-finite values");
}

bool DataMatrix::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

Eigen::Index DataMatrix::column_index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("data have no column named '" + std::string(name) + "'");
  return it - names_.begin();
}

Eigen::VectorXd DataMatrix::column(std::string_view name) const { return values_.col(column_index(name)); }

DataMatrix DataMatrix::select(const std::vector<std::string>& names) const {
  Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) out.col(j) = values_.col(column_index(names[j]));
  return DataMatrix(std::move(out), names);
}

std::uint64_t DataMatrix::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& n : names_) mix(n.data(), n.size() + 1);
  mix(values_.data(), sizeof(double) * static_cast<std::size_t>(values_.size()));
  return h;
}

Eigen::MatrixXd center_columns(const Eigen::MatrixXd& values) {
  return values.rowwise() - values.colwise().mean();
}

Eigen::MatrixXd sample_covariance(const DataMatrix& data) {
  if (data.n_obs() < 2) throw DataError("sample covariance needs at least two observations");
  const Eigen::RowVectorXd means = data.values().colwise().mean();
  const Eigen::MatrixXd centered = data.values().rowwise() - means;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(data.n_obs() - 1);
  for (Eigen::Index j = 0; j < cov.cols(); ++j) {
    if (!(cov(j, j) > 1e-12 * std::max(1.0, means(j) * means(j))))
      throw DataError("column '" + data.column_names()[j] + "' has zero variance");
  }
  return (cov + cov.transpose()) * 0.5;
}

}  // namespace seqcfa
