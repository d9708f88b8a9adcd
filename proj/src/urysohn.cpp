#include "kaid/urysohn.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "kaid/error.hpp"
#include "kaid/rng.hpp"

namespace kaid {

UrysohnModel::UrysohnModel(std::size_t m, PwlBasis basis)
    : m_(m), basis_(std::move(basis)), u_(m * basis_.size(), 0.0) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "Urysohn model needs at least one input");
}

UrysohnModel::UrysohnModel(std::size_t m, PwlBasis basis, std::vector<double> params)
    : m_(m), basis_(std::move(basis)), u_(std::move(params)) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "Urysohn model needs at least one input");
  if (u_.size() != m_ * basis_.size()) {
    std::ostringstream os;
    os << "Urysohn parameters have " << u_.size() << " entries, expected " << m_ << "x"
       << basis_.size();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

void UrysohnModel::check_dim(std::span<const double> x) const {
  if (x.size() != m_) {
    std::ostringstream os;
    os << "input has " << x.size() << " components, model expects " << m_;
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

double UrysohnModel::eval(std::span<const double> x) const {
  check_dim(x);
  double y = 0.0;
  for (std::size_t j = 0; j < m_; ++j) {
    const PwlSegment seg = basis_.locate(x[j]);
    const double* row = &u_[j * n() + seg.left];
    y += row[0] * seg.w_left + row[1] * seg.w_right;
  }
  return y;
}

void UrysohnModel::kaczmarz_step(std::span<const double> x, double y, double mu) {
  require_relaxation(mu);
  check_dim(x);
  const std::size_t width = n();
  double yhat = 0.0;
  double norm2 = 0.0;
  // Segments are recomputed in the update loop; caching them would need a
  // heap buffer per call.
  for (std::size_t j = 0; j < m_; ++j) {
    const PwlSegment seg = basis_.locate(x[j]);
    const double* row = &u_[j * width + seg.left];
    yhat += row[0] * seg.w_left + row[1] * seg.w_right;
    norm2 += seg.w_left * seg.w_left + seg.w_right * seg.w_right;
  }
  // Boundary-continued hats always sum to one, so the row cannot vanish.
  assert(norm2 > 0.0);
  const double factor = mu * (y - yhat) / norm2;
  for (std::size_t j = 0; j < m_; ++j) {
    const PwlSegment seg = basis_.locate(x[j]);
    double* row = &u_[j * width + seg.left];
    row[0] += factor * seg.w_left;
    row[1] += factor * seg.w_right;
  }
}

namespace {

double dataset_rmse(const UrysohnModel& model, const Dataset& data, std::vector<double>& yhat) {
  yhat.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) yhat[i] = model.eval(data[i].x);
  // Constant outputs: report the plain RMSE.
  const double range = data.y_max() > data.y_min() ? data.y_max() - data.y_min() : 1.0;
  return rmse_normalized(data.outputs(), yhat, 0.0, range);
}

}  // namespace

UrysohnFit fit_urysohn(const Dataset& data, UrysohnModel init, const FitConfig& config) {
  config.validate();
  if (data.empty()) fail(ErrorCode::EmptyDataset, "cannot fit a Urysohn model to zero records");
  if (data.dim() != init.m()) {
    std::ostringstream os;
    os << "dataset has " << data.dim() << " inputs, model expects " << init.m();
    fail(ErrorCode::DimensionMismatch, os.str());
  }

  UrysohnFit fit{std::move(init), RunReport{}};
  fit.report.rng = std::string(Rng::algorithm());
  PassOrder order(data.size(), config);
  PlateauMonitor plateau(config.epsilon, config.patience);
  std::vector<double> yhat;

  for (std::size_t pass = 0; pass < config.passes; ++pass) {
    for (std::size_t i : order.next()) {
      const RecordView rec = data[i];
      fit.model.kaczmarz_step(rec.x, rec.y, config.mu);
    }
    const double rmse = dataset_rmse(fit.model, data, yhat);
    fit.report.rmse_history.push_back(rmse);
    if (!std::isfinite(rmse)) {
      fit.report.failed = true;
      fit.report.failure = "non-finite parameters";
      break;
    }
    if (plateau.update(rmse)) {
      fit.report.stopped_early = true;
      break;
    }
  }
  double norm2 = 0.0;
  for (double v : fit.model.params()) norm2 += v * v;
  fit.report.parameter_norm = std::sqrt(norm2);
  return fit;
}

UrysohnFit fit_urysohn(const Dataset& data, const PwlBasis& basis, const FitConfig& config) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "cannot fit a Urysohn model to zero records");
  return fit_urysohn(data, UrysohnModel(data.dim(), basis), config);
}

Dataset series_to_records(std::span<const double> x, std::span<const double> z,
                          std::size_t memory) {
  if (x.size() != z.size()) {
    std::ostringstream os;
    os << "input series has " << x.size() << " samples, output series " << z.size();
    fail(ErrorCode::LengthMismatch, os.str());
  }
  if (memory == 0) fail(ErrorCode::InvalidArgument, "memory depth must be at least 1");
  if (x.size() < memory) {
    std::ostringstream os;
    os << "series of length " << x.size() << " is shorter than memory depth " << memory;
    fail(ErrorCode::SeriesTooShort, os.str());
  }
  Dataset out(memory);
  out.reserve(x.size() - memory + 1);
  std::vector<double> window(memory);
  for (std::size_t i = memory - 1; i < x.size(); ++i) {
    for (std::size_t j = 0; j < memory; ++j) window[j] = x[i - j];
    out.push_back(window, z[i]);
  }
  return out;
}

}  // namespace kaid
