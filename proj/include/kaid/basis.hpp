#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kaid {

/// Nonzero basis values and first derivatives at one argument.
/// Indices are 0-based.
struct SparseEval {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  std::vector<double> derivs;
};

/// Active segment of a piecewise-linear basis: hats `left` and `left + 1`
/// take the values w_left and w_right, with derivatives -slope and +slope.
struct PwlSegment {
  std::size_t left = 0;
  double w_left = 1.0;
  double w_right = 0.0;
  double slope = 0.0;
};

/// Nodal piecewise-linear (hat) basis on `count` equally spaced nodes.
///
/// Outside [lo, hi] the two boundary hats continue linearly along their
/// outermost segment, every other hat stays zero, so the values still sum to
/// one and the derivative never vanishes. At a node the right-hand segment is
/// active (the left-hand one at hi).
class PwlBasis {
 public:
  PwlBasis(double lo, double hi, std::size_t count);

  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }

  [[nodiscard]] PwlSegment locate(double x) const noexcept;
  [[nodiscard]] SparseEval eval(double x) const;
  /// Value of hat p at x (dense query, used by oracles).
  [[nodiscard]] double value(std::size_t p, double x) const noexcept;

  /// Number of entries written by eval_support.
  [[nodiscard]] std::size_t support() const noexcept { return 2; }
  void eval_support(double x, std::size_t* idx, double* val, double* der) const noexcept;

 private:
  double lo_;
  double hi_;
  std::vector<double> nodes_;
};

/// Gaussian bumps exp(-2 (t - t_l)^2), dense and smooth everywhere.
class GaussBasis {
 public:
  static constexpr double kWidth = 2.0;

  explicit GaussBasis(std::vector<double> centers);

  [[nodiscard]] std::size_t size() const noexcept { return centers_.size(); }
  [[nodiscard]] const std::vector<double>& centers() const noexcept { return centers_; }

  [[nodiscard]] SparseEval eval(double t) const;
  [[nodiscard]] std::vector<double> second_deriv(double t) const;

  [[nodiscard]] double value(std::size_t l, double t) const noexcept;
  [[nodiscard]] double deriv(std::size_t l, double t) const noexcept;
  [[nodiscard]] double second(std::size_t l, double t) const noexcept;

  [[nodiscard]] std::size_t support() const noexcept { return centers_.size(); }
  void eval_support(double t, std::size_t* idx, double* val, double* der) const noexcept;

 private:
  std::vector<double> centers_;
};

}  // namespace kaid
