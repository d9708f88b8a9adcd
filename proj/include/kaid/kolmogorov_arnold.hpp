#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kaid/basis.hpp"
#include "kaid/data.hpp"
#include "kaid/rng.hpp"

namespace kaid {

/// Per-record quantities of the Newton-Kaczmarz step, kept in sparse form.
///
/// For addend k the outer basis is active on `outer_width` entries starting at
/// k * outer_width in `outer_index`, `a` (basis values A_kl) and `c` (basis
/// derivatives C_kl). Input j activates inner hats inner_left[j] and
/// inner_left[j] + 1 with values inner_value[2j], inner_value[2j + 1].
/// The inner gradient factorizes: B_kjp = phi_p(x_j) * slope[k] with
/// slope[k] = sum_l G_kl C_kl.
struct NkWorkspace {
  std::vector<double> theta;
  std::size_t outer_width = 0;
  std::vector<std::size_t> outer_index;
  std::vector<double> a;
  std::vector<double> c;
  std::vector<double> slope;
  std::vector<std::size_t> inner_left;
  std::vector<double> inner_value;
  double inner_norm2 = 0.0;  // sum_j sum_p phi_p(x_j)^2
  double e = 0.0;            // model output
  double zeta = 0.0;         // squared norm of the full gradient

  void resize(std::size_t addends, std::size_t inputs, std::size_t outer_width);

  /// Dense views for inspection and testing.
  [[nodiscard]] std::vector<double> dense_a(std::size_t s) const;
  [[nodiscard]] std::vector<double> dense_c(std::size_t s) const;
  [[nodiscard]] std::vector<double> dense_b(std::size_t n) const;
};

enum class StepOutcome { Applied, Skipped };

/// Kolmogorov-Arnold model as a two-level tree of Urysohn operators:
///   theta_k = sum_j sum_p H[k][j][p] phi_p(x_j)
///   y       = sum_k sum_l G[k][l] psi_l(theta_k)
/// Inner functions use a piecewise-linear basis; the outer basis is a
/// template parameter (PwlBasis in practice, GaussBasis for ridge checks).
template <class OuterBasis>
class BasicKaModel {
 public:
  /// Zero parameters.
  BasicKaModel(std::size_t m, std::size_t addends, PwlBasis inner, OuterBasis outer);
  BasicKaModel(std::size_t m, std::size_t addends, PwlBasis inner, OuterBasis outer,
               std::vector<double> h, std::vector<double> g);

  [[nodiscard]] std::size_t m() const noexcept { return m_; }
  [[nodiscard]] std::size_t addends() const noexcept { return k_; }
  [[nodiscard]] std::size_t n() const noexcept { return inner_.size(); }
  [[nodiscard]] std::size_t s() const noexcept { return outer_.size(); }
  [[nodiscard]] const PwlBasis& inner() const noexcept { return inner_; }
  [[nodiscard]] const OuterBasis& outer() const noexcept { return outer_; }

  /// H is K x m x n row-major; G is K x s row-major.
  [[nodiscard]] std::span<const double> h() const noexcept { return h_; }
  [[nodiscard]] std::span<double> h() noexcept { return h_; }
  [[nodiscard]] std::span<const double> g() const noexcept { return g_; }
  [[nodiscard]] std::span<double> g() noexcept { return g_; }
  [[nodiscard]] double& h(std::size_t k, std::size_t j, std::size_t p) noexcept {
    return h_[(k * m_ + j) * n() + p];
  }
  [[nodiscard]] double& g(std::size_t k, std::size_t l) noexcept { return g_[k * s() + l]; }

  void theta(std::span<const double> x, std::span<double> out) const;
  [[nodiscard]] std::vector<double> theta(std::span<const double> x) const;

  [[nodiscard]] double eval(std::span<const double> x) const;
  /// Evaluates and fills `ws` with everything nk_step needs.
  double eval(std::span<const double> x, NkWorkspace& ws) const;

  /// One Newton-Kaczmarz step on record (x, y):
  ///   H_kjp += mu (y - E) / zeta * B_kjp,  G_kl += mu (y - E) / zeta * A_kl
  /// with A, B, E, zeta taken at the current parameters. Steps with
  /// zeta <= 1e-300 are skipped.
  StepOutcome nk_step(std::span<const double> x, double y, double mu, NkWorkspace& ws);
  StepOutcome nk_step(std::span<const double> x, double y, double mu);

  [[nodiscard]] bool finite() const noexcept;
  [[nodiscard]] double parameter_norm() const noexcept;

 private:
  void check_dim(std::span<const double> x) const;

  std::size_t m_;
  std::size_t k_;
  PwlBasis inner_;
  OuterBasis outer_;
  std::vector<double> h_;
  std::vector<double> g_;
};

using KaModel = BasicKaModel<PwlBasis>;

extern template class BasicKaModel<PwlBasis>;
extern template class BasicKaModel<GaussBasis>;

/// Random start with outer basis on [y_min, y_max]:
///   H ~ unif(y_min / m, y_max / m),  G ~ unif(y_min / K, y_max / K).
/// With inputs inside the inner domain every theta_k lands in [y_min, y_max].
KaModel ka_init(std::size_t m, std::size_t addends, std::size_t n, std::size_t s, double x_min,
                double x_max, double y_min, double y_max, Rng& rng);

struct KaShape {
  std::size_t addends = 0;  // 0 means the full 2m + 1
  std::size_t n = 5;
  std::size_t s = 7;
  /// Inner domain; when not set (lo >= hi) it is taken from the training inputs.
  double x_min = 0.0;
  double x_max = 0.0;
};

struct KaFit {
  KaModel model;
  RunReport report;
};

/// Initializes from `train` (seeded with config.seed on the Init stream), then
/// runs config.passes sequential Newton-Kaczmarz passes over `train`. After
/// every pass the normalized RMSE on `validation` is recorded.
KaFit fit_ka(const Dataset& train, const Dataset& validation, const KaShape& shape,
             const FitConfig& config);
/// Continues from an existing model.
KaFit fit_ka(const Dataset& train, const Dataset& validation, KaModel init,
             const FitConfig& config);

double ka_rmse(const KaModel& model, const Dataset& data);

}  // namespace kaid
