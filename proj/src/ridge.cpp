#include "kaid/ridge.hpp"

#include <cmath>
#include <sstream>

#include "kaid/error.hpp"

namespace kaid {

RidgeModel::RidgeModel(std::vector<double> c, std::vector<double> g, GaussBasis outer)
    : c_(std::move(c)), g_(std::move(g)), outer_(std::move(outer)) {
  if (c_.empty()) fail(ErrorCode::InvalidArgument, "ridge model needs at least one input");
  if (g_.size() != outer_.size()) {
    std::ostringstream os;
    os << "ridge model has " << g_.size() << " outer coefficients for " << outer_.size()
       << " basis centers";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

void RidgeModel::check_dim(std::span<const double> x) const {
  if (x.size() != c_.size()) {
    std::ostringstream os;
    os << "input has " << x.size() << " components, model expects " << c_.size();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

Eigen::VectorXd RidgeModel::stacked() const {
  Eigen::VectorXd z(parameter_count());
  for (std::size_t l = 0; l < s(); ++l) z[static_cast<Eigen::Index>(l)] = g_[l];
  for (std::size_t j = 0; j < m(); ++j) z[static_cast<Eigen::Index>(s() + j)] = c_[j];
  return z;
}

void RidgeModel::set_stacked(const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != parameter_count()) {
    fail(ErrorCode::DimensionMismatch, "stacked ridge parameter vector has the wrong length");
  }
  for (std::size_t l = 0; l < s(); ++l) g_[l] = z[static_cast<Eigen::Index>(l)];
  for (std::size_t j = 0; j < m(); ++j) c_[j] = z[static_cast<Eigen::Index>(s() + j)];
}

double RidgeModel::inner(std::span<const double> x) const {
  check_dim(x);
  double theta = 0.0;
  for (std::size_t j = 0; j < c_.size(); ++j) theta += c_[j] * x[j];
  return theta;
}

double RidgeModel::eval(std::span<const double> x) const {
  const double theta = inner(x);
  double y = 0.0;
  for (std::size_t l = 0; l < g_.size(); ++l) y += g_[l] * outer_.value(l, theta);
  return y;
}

double RidgeModel::gradient(std::span<const double> x, std::span<double> grad) const {
  const double theta = inner(x);
  double y = 0.0;
  double slope = 0.0;
  for (std::size_t l = 0; l < g_.size(); ++l) {
    const double psi = outer_.value(l, theta);
    grad[l] = psi;
    y += g_[l] * psi;
    slope += g_[l] * outer_.deriv(l, theta);
  }
  for (std::size_t j = 0; j < c_.size(); ++j) grad[g_.size() + j] = x[j] * slope;
  return y;
}

bool RidgeModel::nk_step(std::span<const double> x, double y, double mu) {
  require_relaxation(mu);
  // s + m is small; a fixed buffer avoids a heap allocation per step.
  constexpr std::size_t kStack = 64;
  double stack[kStack];
  std::vector<double> heap;
  double* grad = stack;
  if (parameter_count() > kStack) {
    heap.resize(parameter_count());
    grad = heap.data();
  }
  const double yhat = gradient(x, std::span<double>(grad, parameter_count()));
  double norm2 = 0.0;
  for (std::size_t i = 0; i < parameter_count(); ++i) norm2 += grad[i] * grad[i];
  if (!(norm2 > 1e-300)) return false;
  const double factor = mu * (yhat - y) / norm2;
  for (std::size_t l = 0; l < g_.size(); ++l) g_[l] -= factor * grad[l];
  for (std::size_t j = 0; j < c_.size(); ++j) c_[j] -= factor * grad[g_.size() + j];
  return true;
}

bool RidgeModel::finite() const noexcept {
  for (double v : c_) if (!std::isfinite(v)) return false;
  for (double v : g_) if (!std::isfinite(v)) return false;
  return true;
}

RidgeModel reference_ridge_model() {
  return RidgeModel({-0.7, 2.5, -1.2, 0.8, 1.6}, {2.1, -0.9, 0.7}, GaussBasis({0.5, 1.5, 2.5}));
}

RidgeModel perturbed_ridge_model(const RidgeModel& exact, double alpha, Rng& rng) {
  RidgeModel out = exact;
  for (double& v : out.c()) v += alpha * rng.uniform(-0.5, 0.5);
  for (double& v : out.g()) v += alpha * rng.uniform(-0.5, 0.5);
  return out;
}

double sum_of_squares(const RidgeModel& model, const Dataset& data) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = model.eval(data[i].x) - data[i].y;
    sum += r * r;
  }
  return 0.5 * sum;
}

GnSystem assemble_gn_system(const RidgeModel& model, const Dataset& data) {
  const std::size_t s = model.s();
  const std::size_t m = model.m();
  const auto np = static_cast<Eigen::Index>(s + m);
  GnSystem sys;
  sys.gradient = Eigen::VectorXd::Zero(np);
  sys.hessian = Eigen::MatrixXd::Zero(np, np);
  Eigen::VectorXd dr(np);
  Eigen::VectorXd eta(static_cast<Eigen::Index>(s));
  const GaussBasis& basis = model.outer();
  const auto g = model.g();

  for (std::size_t i = 0; i < data.size(); ++i) {
    const RecordView rec = data[i];
    const double theta = model.inner(rec.x);
    double yhat = 0.0;
    double slope = 0.0;   // sum_l G_l eta_l(theta)
    double curve = 0.0;   // sum_l G_l xi_l(theta)
    for (std::size_t l = 0; l < s; ++l) {
      const double psi = basis.value(l, theta);
      const double d1 = basis.deriv(l, theta);
      dr[static_cast<Eigen::Index>(l)] = psi;
      eta[static_cast<Eigen::Index>(l)] = d1;
      yhat += g[l] * psi;
      slope += g[l] * d1;
      curve += g[l] * basis.second(l, theta);
    }
    for (std::size_t j = 0; j < m; ++j) dr[static_cast<Eigen::Index>(s + j)] = rec.x[j] * slope;
    const double r = yhat - rec.y;

    sys.s += 0.5 * r * r;
    sys.gradient.noalias() += r * dr;
    sys.hessian.noalias() += dr * dr.transpose();
    // Second-order residual terms: d2r/dG_l dc_j = x_j eta_l, d2r/dc_j dc_k = x_j x_k curve.
    for (std::size_t j = 0; j < m; ++j) {
      const auto cj = static_cast<Eigen::Index>(s + j);
      for (std::size_t l = 0; l < s; ++l) {
        const auto gl = static_cast<Eigen::Index>(l);
        const double term = r * rec.x[j] * eta[gl];
        sys.hessian(gl, cj) += term;
        sys.hessian(cj, gl) += term;
      }
      for (std::size_t k = 0; k < m; ++k) {
        sys.hessian(cj, static_cast<Eigen::Index>(s + k)) += r * rec.x[j] * rec.x[k] * curve;
      }
    }
  }
  return sys;
}

GnResult fit_ridge_gn(const Dataset& data, RidgeModel init, const GnOptions& options) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "cannot fit a ridge model to zero records");
  if (data.dim() != init.m()) {
    std::ostringstream os;
    os << "dataset has " << data.dim() << " inputs, model expects " << init.m();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  if (!(options.delta > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance delta must be positive");

  GnResult result{std::move(init), false, false, {}, 0};
  double mu = options.initial_mu;
  Eigen::VectorXd z = result.model.stacked();

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const GnSystem sys = assemble_gn_system(result.model, data);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.hessian);
    const Eigen::VectorXd pivots = ldlt.vectorD();
    const double scale = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
        pivots.cwiseAbs().minCoeff() <= options.pivot_tolerance * scale) {
      result.failed = true;
      result.failure = "singular Hessian";
      result.iterations = iter;
      return result;
    }
    const Eigen::VectorXd step = ldlt.solve(sys.gradient);
    const Eigen::VectorXd next = z - mu * step;
    const double change = (next - z).norm();
    z = next;
    result.model.set_stacked(z);
    result.iterations = iter + 1;

    if (!result.model.finite() || !std::isfinite(change)) {
      result.failed = true;
      result.failure = "non-finite parameters";
      return result;
    }
    if (change < options.delta) {
      if (!options.require_small_gradient ||
          assemble_gn_system(result.model, data).gradient.norm() < options.delta) {
        result.converged = true;
        return result;
      }
    }
    if (change < options.full_step_threshold) mu = 1.0;
  }
  return result;
}

RidgeNkResult fit_ridge_nk(const Dataset& data, RidgeModel init, double mu, std::size_t steps) {
  require_relaxation(mu);
  if (data.empty()) fail(ErrorCode::EmptyDataset, "cannot fit a ridge model to zero records");
  if (data.dim() != init.m()) {
    std::ostringstream os;
    os << "dataset has " << data.dim() << " inputs, model expects " << init.m();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  RidgeNkResult result{std::move(init)};
  for (std::size_t q = 0; q < steps; ++q) {
    const RecordView rec = data[q % data.size()];
    if (!result.model.nk_step(rec.x, rec.y, mu)) ++result.skipped_steps;
  }
  result.failed = !result.model.finite();
  return result;
}

double ridge_rmse(const RidgeModel& model, const Dataset& data) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "rmse over zero records");
  std::vector<double> yhat(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) yhat[i] = model.eval(data[i].x);
  const double range = data.y_max() > data.y_min() ? data.y_max() - data.y_min() : 1.0;
  return rmse_normalized(data.outputs(), yhat, 0.0, range);
}

}  // namespace kaid
