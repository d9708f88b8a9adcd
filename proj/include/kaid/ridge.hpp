#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kaid/basis.hpp"
#include "kaid/data.hpp"
#include "kaid/rng.hpp"

namespace kaid {

/// Ridge function y = sum_l G_l psi_l(sum_j c_j x_j) with a Gaussian outer basis.
/// The stacked parameter vector is Z = [G_1..G_s, c_1..c_m].
class RidgeModel {
 public:
  RidgeModel(std::vector<double> c, std::vector<double> g, GaussBasis outer);

  [[nodiscard]] std::size_t m() const noexcept { return c_.size(); }
  [[nodiscard]] std::size_t s() const noexcept { return g_.size(); }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return s() + m(); }
  [[nodiscard]] const GaussBasis& outer() const noexcept { return outer_; }

  [[nodiscard]] std::span<const double> c() const noexcept { return c_; }
  [[nodiscard]] std::span<double> c() noexcept { return c_; }
  [[nodiscard]] std::span<const double> g() const noexcept { return g_; }
  [[nodiscard]] std::span<double> g() noexcept { return g_; }

  [[nodiscard]] Eigen::VectorXd stacked() const;
  void set_stacked(const Eigen::VectorXd& z);

  [[nodiscard]] double inner(std::span<const double> x) const;
  [[nodiscard]] double eval(std::span<const double> x) const;
  /// d yhat / dZ at x, written into `grad` (length s + m). Returns yhat.
  double gradient(std::span<const double> x, std::span<double> grad) const;

  /// Newton-Kaczmarz step on residual r = yhat - y:
  ///   Z -= mu r / |grad r|^2 grad r
  /// Skipped when |grad r|^2 <= 1e-300.
  bool nk_step(std::span<const double> x, double y, double mu);

  [[nodiscard]] bool finite() const noexcept;

 private:
  void check_dim(std::span<const double> x) const;

  std::vector<double> c_;
  std::vector<double> g_;
  GaussBasis outer_;
};

/// The 5-input, 3-center reference model used by the ridge study:
/// c = (-0.7, 2.5, -1.2, 0.8, 1.6), G = (2.1, -0.9, 0.7), centers l - 0.5.
RidgeModel reference_ridge_model();

/// c_j + alpha e_j, G_l + alpha e_l with e ~ unif(-0.5, 0.5); c drawn first.
RidgeModel perturbed_ridge_model(const RidgeModel& exact, double alpha, Rng& rng);

/// Sum of squares S = 1/2 sum_i (yhat_i - y_i)^2 with its exact gradient L
/// and full Hessian M (second-order residual terms included).
struct GnSystem {
  double s = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

GnSystem assemble_gn_system(const RidgeModel& model, const Dataset& data);
double sum_of_squares(const RidgeModel& model, const Dataset& data);

struct GnOptions {
  double delta = 1e-12;
  std::size_t max_iterations = 100;
  double initial_mu = 0.1;
  /// mu becomes 1 once |Z^{q+1} - Z^q| drops below this.
  double full_step_threshold = 0.1;
  /// Also require |L| < delta for convergence.
  bool require_small_gradient = false;
  /// Relative pivot magnitude below which the Hessian counts as singular.
  double pivot_tolerance = 1e-12;
};

struct GnResult {
  RidgeModel model;
  bool converged = false;
  bool failed = false;
  std::string failure;
  std::size_t iterations = 0;
};

/// Newton-Raphson on S with exact second derivatives (named Gauss-Newton in
/// the ridge study): Z <- Z - mu M^{-1} L.
GnResult fit_ridge_gn(const Dataset& data, RidgeModel init, const GnOptions& options = {});

struct RidgeNkResult {
  RidgeModel model;
  std::size_t skipped_steps = 0;
  bool failed = false;
};

/// `steps` single-record Newton-Kaczmarz steps, cycling through the records.
RidgeNkResult fit_ridge_nk(const Dataset& data, RidgeModel init, double mu, std::size_t steps);

double ridge_rmse(const RidgeModel& model, const Dataset& data);

}  // namespace kaid
