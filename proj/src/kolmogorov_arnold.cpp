#include "kaid/kolmogorov_arnold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "kaid/error.hpp"

namespace kaid {

void NkWorkspace::resize(std::size_t addends, std::size_t inputs, std::size_t width) {
  theta.resize(addends);
  outer_width = width;
  outer_index.resize(addends * width);
  a.resize(addends * width);
  c.resize(addends * width);
  slope.resize(addends);
  inner_left.resize(inputs);
  inner_value.resize(2 * inputs);
}

std::vector<double> NkWorkspace::dense_a(std::size_t s) const {
  std::vector<double> out(theta.size() * s, 0.0);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (std::size_t w = 0; w < outer_width; ++w) {
      out[k * s + outer_index[k * outer_width + w]] += a[k * outer_width + w];
    }
  }
  return out;
}

std::vector<double> NkWorkspace::dense_c(std::size_t s) const {
  std::vector<double> out(theta.size() * s, 0.0);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (std::size_t w = 0; w < outer_width; ++w) {
      out[k * s + outer_index[k * outer_width + w]] += c[k * outer_width + w];
    }
  }
  return out;
}

std::vector<double> NkWorkspace::dense_b(std::size_t n) const {
  const std::size_t m = inner_left.size();
  std::vector<double> out(theta.size() * m * n, 0.0);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      double* row = &out[(k * m + j) * n + inner_left[j]];
      row[0] += inner_value[2 * j] * slope[k];
      row[1] += inner_value[2 * j + 1] * slope[k];
    }
  }
  return out;
}

template <class OuterBasis>
BasicKaModel<OuterBasis>::BasicKaModel(std::size_t m, std::size_t addends, PwlBasis inner,
                                       OuterBasis outer)
    : BasicKaModel(m, addends, inner, outer,
                   std::vector<double>(addends * m * inner.size(), 0.0),
                   std::vector<double>(addends * outer.size(), 0.0)) {}

template <class OuterBasis>
BasicKaModel<OuterBasis>::BasicKaModel(std::size_t m, std::size_t addends, PwlBasis inner,
                                       OuterBasis outer, std::vector<double> h,
                                       std::vector<double> g)
    : m_(m), k_(addends), inner_(std::move(inner)), outer_(std::move(outer)), h_(std::move(h)),
      g_(std::move(g)) {
  if (m_ == 0) fail(ErrorCode::InvalidArgument, "Kolmogorov-Arnold model needs at least one input");
  if (k_ < 1 || k_ > 2 * m_ + 1) {
    std::ostringstream os;
    os << "addend count " << k_ << " outside [1, " << 2 * m_ + 1 << "]";
    fail(ErrorCode::InvalidAddendCount, os.str());
  }
  if (h_.size() != k_ * m_ * n() || g_.size() != k_ * s()) {
    std::ostringstream os;
    os << "parameter sizes H=" << h_.size() << " G=" << g_.size() << " do not match K=" << k_
       << " m=" << m_ << " n=" << n() << " s=" << s();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

template <class OuterBasis>
void BasicKaModel<OuterBasis>::check_dim(std::span<const double> x) const {
  if (x.size() != m_) {
    std::ostringstream os;
    os << "input has " << x.size() << " components, model expects " << m_;
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

template <class OuterBasis>
void BasicKaModel<OuterBasis>::theta(std::span<const double> x, std::span<double> out) const {
  check_dim(x);
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t nn = n();
  for (std::size_t j = 0; j < m_; ++j) {
    const PwlSegment seg = inner_.locate(x[j]);
    for (std::size_t k = 0; k < k_; ++k) {
      const double* row = &h_[(k * m_ + j) * nn + seg.left];
      out[k] += row[0] * seg.w_left + row[1] * seg.w_right;
    }
  }
}

template <class OuterBasis>
std::vector<double> BasicKaModel<OuterBasis>::theta(std::span<const double> x) const {
  std::vector<double> out(k_);
  theta(x, out);
  return out;
}

template <class OuterBasis>
double BasicKaModel<OuterBasis>::eval(std::span<const double> x) const {
  NkWorkspace ws;
  return eval(x, ws);
}

template <class OuterBasis>
double BasicKaModel<OuterBasis>::eval(std::span<const double> x, NkWorkspace& ws) const {
  check_dim(x);
  const std::size_t width = outer_.support();
  ws.resize(k_, m_, width);
  std::fill(ws.theta.begin(), ws.theta.end(), 0.0);

  const std::size_t nn = n();
  double inner_norm2 = 0.0;
  for (std::size_t j = 0; j < m_; ++j) {
    const PwlSegment seg = inner_.locate(x[j]);
    ws.inner_left[j] = seg.left;
    ws.inner_value[2 * j] = seg.w_left;
    ws.inner_value[2 * j + 1] = seg.w_right;
    inner_norm2 += seg.w_left * seg.w_left + seg.w_right * seg.w_right;
    for (std::size_t k = 0; k < k_; ++k) {
      const double* row = &h_[(k * m_ + j) * nn + seg.left];
      ws.theta[k] += row[0] * seg.w_left + row[1] * seg.w_right;
    }
  }
  ws.inner_norm2 = inner_norm2;

  const std::size_t ss = s();
  double e = 0.0;
  double outer_norm2 = 0.0;
  double slope_norm2 = 0.0;
  for (std::size_t k = 0; k < k_; ++k) {
    const std::size_t base = k * width;
    outer_.eval_support(ws.theta[k], &ws.outer_index[base], &ws.a[base], &ws.c[base]);
    double slope = 0.0;
    for (std::size_t w = 0; w < width; ++w) {
      const double gkl = g_[k * ss + ws.outer_index[base + w]];
      e += gkl * ws.a[base + w];
      slope += gkl * ws.c[base + w];
      outer_norm2 += ws.a[base + w] * ws.a[base + w];
    }
    ws.slope[k] = slope;
    slope_norm2 += slope * slope;
  }
  ws.e = e;
  ws.zeta = outer_norm2 + slope_norm2 * inner_norm2;
  return e;
}

template <class OuterBasis>
StepOutcome BasicKaModel<OuterBasis>::nk_step(std::span<const double> x, double y, double mu,
                                              NkWorkspace& ws) {
  require_relaxation(mu);
  eval(x, ws);
  if (!(ws.zeta > 1e-300)) return StepOutcome::Skipped;
  const double factor = mu * (y - ws.e) / ws.zeta;
  const std::size_t width = ws.outer_width;
  const std::size_t ss = s();
  const std::size_t nn = n();
  for (std::size_t k = 0; k < k_; ++k) {
    const std::size_t base = k * width;
    for (std::size_t w = 0; w < width; ++w) {
      g_[k * ss + ws.outer_index[base + w]] += factor * ws.a[base + w];
    }
    const double fk = factor * ws.slope[k];
    for (std::size_t j = 0; j < m_; ++j) {
      double* row = &h_[(k * m_ + j) * nn + ws.inner_left[j]];
      row[0] += fk * ws.inner_value[2 * j];
      row[1] += fk * ws.inner_value[2 * j + 1];
    }
  }
  return StepOutcome::Applied;
}

template <class OuterBasis>
StepOutcome BasicKaModel<OuterBasis>::nk_step(std::span<const double> x, double y, double mu) {
  NkWorkspace ws;
  return nk_step(x, y, mu, ws);
}

template <class OuterBasis>
bool BasicKaModel<OuterBasis>::finite() const noexcept {
  const auto ok = [](double v) { return std::isfinite(v); };
  return std::all_of(h_.begin(), h_.end(), ok) && std::all_of(g_.begin(), g_.end(), ok);
}

template <class OuterBasis>
double BasicKaModel<OuterBasis>::parameter_norm() const noexcept {
  double sum = 0.0;
  for (double v : h_) sum += v * v;
  for (double v : g_) sum += v * v;
  return std::sqrt(sum);
}

template class BasicKaModel<PwlBasis>;
template class BasicKaModel<GaussBasis>;

KaModel ka_init(std::size_t m, std::size_t addends, std::size_t n, std::size_t s, double x_min,
                double x_max, double y_min, double y_max, Rng& rng) {
  if (!(y_min < y_max)) {
    std::ostringstream os;
    os << "output range [" << y_min << ", " << y_max << "] is empty";
    fail(ErrorCode::InvalidRange, os.str());
  }
  if (m == 0) fail(ErrorCode::InvalidArgument, "Kolmogorov-Arnold model needs at least one input");
  if (addends < 1 || addends > 2 * m + 1) {
    std::ostringstream os;
    os << "addend count " << addends << " outside [1, " << 2 * m + 1 << "]";
    fail(ErrorCode::InvalidAddendCount, os.str());
  }
  const double md = static_cast<double>(m);
  const double kd = static_cast<double>(addends);
  std::vector<double> h(addends * m * n);
  for (double& v : h) v = rng.uniform(y_min / md, y_max / md);
  std::vector<double> g(addends * s);
  for (double& v : g) v = rng.uniform(y_min / kd, y_max / kd);
  return KaModel(m, addends, PwlBasis(x_min, x_max, n), PwlBasis(y_min, y_max, s), std::move(h),
                 std::move(g));
}

double ka_rmse(const KaModel& model, const Dataset& data) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "rmse over zero records");
  NkWorkspace ws;
  std::vector<double> yhat(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) yhat[i] = model.eval(data[i].x, ws);
  const double range = data.y_max() > data.y_min() ? data.y_max() - data.y_min() : 1.0;
  return rmse_normalized(data.outputs(), yhat, 0.0, range);
}

KaFit fit_ka(const Dataset& train, const Dataset& validation, KaModel init,
             const FitConfig& config) {
  config.validate();
  if (train.empty()) fail(ErrorCode::EmptyDataset, "cannot fit a Kolmogorov-Arnold model to zero records");
  const Dataset& monitor = validation.empty() ? train : validation;
  if (train.dim() != init.m() || monitor.dim() != init.m()) {
    std::ostringstream os;
    os << "dataset has " << train.dim() << " inputs, model expects " << init.m();
    fail(ErrorCode::DimensionMismatch, os.str());
  }

  KaFit fit{std::move(init), RunReport{}};
  fit.report.rng = std::string(Rng::algorithm());
  PassOrder order(train.size(), config);
  PlateauMonitor plateau(config.epsilon, config.patience);
  NkWorkspace ws;

  for (std::size_t pass = 0; pass < config.passes; ++pass) {
    for (std::size_t i : order.next()) {
      const RecordView rec = train[i];
      if (fit.model.nk_step(rec.x, rec.y, config.mu, ws) == StepOutcome::Skipped) {
        ++fit.report.skipped_steps;
      }
    }
    if (!fit.model.finite()) {
      fit.report.failed = true;
      fit.report.failure = "non-finite parameters after pass " + std::to_string(pass + 1);
      break;
    }
    const double rmse = ka_rmse(fit.model, monitor);
    fit.report.rmse_history.push_back(rmse);
    if (plateau.update(rmse)) {
      fit.report.stopped_early = true;
      break;
    }
  }
  fit.report.parameter_norm = fit.model.parameter_norm();
  return fit;
}

KaFit fit_ka(const Dataset& train, const Dataset& validation, const KaShape& shape,
             const FitConfig& config) {
  config.validate();
  if (train.empty()) fail(ErrorCode::EmptyDataset, "cannot fit a Kolmogorov-Arnold model to zero records");
  const std::size_t m = train.dim();
  const std::size_t addends = shape.addends == 0 ? 2 * m + 1 : shape.addends;
  double x_min = shape.x_min;
  double x_max = shape.x_max;
  if (!(x_min < x_max)) std::tie(x_min, x_max) = train.input_range();
  Rng rng(config.seed, Stream::Init);
  KaModel init = ka_init(m, addends, shape.n, shape.s, x_min, x_max, train.y_min(), train.y_max(), rng);
  return fit_ka(train, validation, std::move(init), config);
}

}  // namespace kaid
