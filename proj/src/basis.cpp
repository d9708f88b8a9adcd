#include "kaid/basis.hpp"

#include <cmath>
#include <sstream>

#include "kaid/error.hpp"

namespace kaid {

PwlBasis::PwlBasis(double lo, double hi, std::size_t count) : lo_(lo), hi_(hi) {
  if (count < 2) {
    fail(ErrorCode::InvalidArgument, "piecewise-linear basis needs at least 2 nodes");
  }
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    std::ostringstream os;
    os << "piecewise-linear basis needs lo < hi, got [" << lo << ", " << hi << "]";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  nodes_.resize(count);
  const double last = static_cast<double>(count - 1);
  for (std::size_t p = 0; p < count; ++p) {
    nodes_[p] = lo + static_cast<double>(p) / last * (hi - lo);
  }
  nodes_.back() = hi;
}

PwlSegment PwlBasis::locate(double x) const noexcept {
  const std::size_t segments = nodes_.size() - 1;
  std::size_t left = 0;
  if (x >= hi_) {
    left = segments - 1;
  } else if (x > lo_) {
    const double pos = (x - lo_) / (hi_ - lo_) * static_cast<double>(segments);
    left = static_cast<std::size_t>(pos);
    if (left >= segments) left = segments - 1;
    // The closed-form guess can be off by one next to a node; the stored
    // nodes are authoritative.
    if (left + 1 < segments && x >= nodes_[left + 1]) ++left;
    if (left > 0 && x < nodes_[left]) --left;
  }
  const double a = nodes_[left];
  const double b = nodes_[left + 1];
  PwlSegment seg;
  seg.left = left;
  seg.slope = 1.0 / (b - a);
  seg.w_right = (x - a) / (b - a);
  if (x == b) seg.w_right = 1.0;
  seg.w_left = 1.0 - seg.w_right;
  return seg;
}

SparseEval PwlBasis::eval(double x) const {
  const PwlSegment seg = locate(x);
  return SparseEval{{seg.left, seg.left + 1}, {seg.w_left, seg.w_right}, {-seg.slope, seg.slope}};
}

double PwlBasis::value(std::size_t p, double x) const noexcept {
  const PwlSegment seg = locate(x);
  if (p == seg.left) return seg.w_left;
  if (p == seg.left + 1) return seg.w_right;
  return 0.0;
}

void PwlBasis::eval_support(double x, std::size_t* idx, double* val, double* der) const noexcept {
  const PwlSegment seg = locate(x);
  idx[0] = seg.left;
  idx[1] = seg.left + 1;
  val[0] = seg.w_left;
  val[1] = seg.w_right;
  der[0] = -seg.slope;
  der[1] = seg.slope;
}

GaussBasis::GaussBasis(std::vector<double> centers) : centers_(std::move(centers)) {
  if (centers_.empty()) fail(ErrorCode::InvalidArgument, "Gaussian basis needs at least one center");
  for (double c : centers_) {
    if (!std::isfinite(c)) fail(ErrorCode::InvalidArgument, "Gaussian basis center is not finite");
  }
}

double GaussBasis::value(std::size_t l, double t) const noexcept {
  const double d = t - centers_[l];
  return std::exp(-kWidth * d * d);
}

double GaussBasis::deriv(std::size_t l, double t) const noexcept {
  const double d = t - centers_[l];
  return -2.0 * kWidth * d * std::exp(-kWidth * d * d);
}

double GaussBasis::second(std::size_t l, double t) const noexcept {
  const double d = t - centers_[l];
  // d2/dt2 exp(-w d^2) = (4 w^2 d^2 - 2 w) exp(-w d^2); with w = 2: (16 d^2 - 4).
  return (4.0 * kWidth * kWidth * d * d - 2.0 * kWidth) * std::exp(-kWidth * d * d);
}

SparseEval GaussBasis::eval(double t) const {
  SparseEval out;
  out.indices.resize(size());
  out.values.resize(size());
  out.derivs.resize(size());
  eval_support(t, out.indices.data(), out.values.data(), out.derivs.data());
  return out;
}

std::vector<double> GaussBasis::second_deriv(double t) const {
  std::vector<double> out(size());
  for (std::size_t l = 0; l < size(); ++l) out[l] = second(l, t);
  return out;
}

void GaussBasis::eval_support(double t, std::size_t* idx, double* val, double* der) const noexcept {
  for (std::size_t l = 0; l < centers_.size(); ++l) {
    const double d = t - centers_[l];
    const double v = std::exp(-kWidth * d * d);
    idx[l] = l;
    val[l] = v;
    der[l] = -2.0 * kWidth * d * v;
  }
}

}  // namespace kaid
