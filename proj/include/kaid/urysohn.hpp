#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kaid/basis.hpp"
#include "kaid/data.hpp"

namespace kaid {

/// Discrete Urysohn operator (generalized additive model)
///   y = sum_j sum_l U[j][l] phi_l(x_j)
/// over one piecewise-linear basis shared by all m inputs.
class UrysohnModel {
 public:
  /// All-zero parameters.
  UrysohnModel(std::size_t m, PwlBasis basis);
  /// `params` is row-major m x n.
  UrysohnModel(std::size_t m, PwlBasis basis, std::vector<double> params);

  [[nodiscard]] std::size_t m() const noexcept { return m_; }
  [[nodiscard]] std::size_t n() const noexcept { return basis_.size(); }
  [[nodiscard]] const PwlBasis& basis() const noexcept { return basis_; }

  [[nodiscard]] std::span<const double> params() const noexcept { return u_; }
  [[nodiscard]] std::span<double> params() noexcept { return u_; }
  [[nodiscard]] double& at(std::size_t j, std::size_t l) noexcept { return u_[j * n() + l]; }
  [[nodiscard]] double at(std::size_t j, std::size_t l) const noexcept { return u_[j * n() + l]; }

  [[nodiscard]] double eval(std::span<const double> x) const;

  /// One Kaczmarz projection towards the hyperplane of record (x, y):
  ///   U += mu (y - M U) / |M|^2 M^T
  /// where M is the row of basis values; touches at most 2m entries.
  void kaczmarz_step(std::span<const double> x, double y, double mu);

 private:
  void check_dim(std::span<const double> x) const;

  std::size_t m_;
  PwlBasis basis_;
  std::vector<double> u_;
};

struct UrysohnFit {
  UrysohnModel model;
  RunReport report;
};

/// Sequential Kaczmarz passes over `data`, starting from `init`. After each
/// pass the normalized RMSE on `data` is appended to the report.
UrysohnFit fit_urysohn(const Dataset& data, UrysohnModel init, const FitConfig& config);
/// Same, starting from U = 0 on `basis`.
UrysohnFit fit_urysohn(const Dataset& data, const PwlBasis& basis, const FitConfig& config);

/// Sliding windows of a time series: record i has inputs
/// (x_i, x_{i-1}, ..., x_{i-m+1}) and output z_i.
Dataset series_to_records(std::span<const double> x, std::span<const double> z,
                          std::size_t memory);

}  // namespace kaid
