#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kaid/basis.hpp"
#include "kaid/generators.hpp"
#include "kaid/kolmogorov_arnold.hpp"
#include "kaid/ridge.hpp"
#include "kaid/rng.hpp"
#include "kaid/urysohn.hpp"

namespace kaid::props {

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t size, double lo, double hi) {
  std::vector<double> v(size);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

KaModel random_ka(Rng& rng, std::size_t m, std::size_t k, std::size_t n, std::size_t s) {
  return ka_init(m, k, n, s, 0.0, 1.0, rng.uniform(-1.0, 0.0), rng.uniform(1.0, 2.0), rng);
}

bool near_node(const PwlBasis& basis, double t, double gap) {
  return std::any_of(basis.nodes().begin(), basis.nodes().end(),
                     [&](double node) { return std::abs(t - node) < gap; });
}

}  // namespace

double max_relative_error(std::span<const double> analytic, std::span<const double> reference) {
  double scale = 0.0;
  for (double r : reference) scale = std::max(scale, std::abs(r));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(reference[i]), 1e-3 * scale, 1e-12});
    worst = std::max(worst, std::abs(analytic[i] - reference[i]) / denom);
  }
  return worst;
}

Outcome partition_of_unity(std::uint64_t seed, std::size_t samples) {
  Outcome out{"partition of unity", 0.0, 1e-12, 0};
  Rng rng(seed);
  const PwlBasis bases[] = {PwlBasis(0.0, 1.0, 5), PwlBasis(-2.0, 3.0, 6), PwlBasis(-0.3, 7.1, 17),
                            PwlBasis(1e-3, 2e-3, 2)};
  for (const PwlBasis& b : bases) {
    for (std::size_t i = 0; i < samples; ++i) {
      const SparseEval e = b.eval(rng.uniform(b.lo(), b.hi()));
      const double sum = std::accumulate(e.values.begin(), e.values.end(), 0.0);
      out.worst = std::max(out.worst, std::abs(sum - 1.0));
      ++out.samples;
    }
  }
  return out;
}

Outcome pwl_nodal_property() {
  Outcome out{"nodal property", 0.0, 0.0, 0};
  for (std::size_t count : {2u, 3u, 5u, 11u, 40u}) {
    const PwlBasis b(-1.3, 2.9, count);
    for (std::size_t q = 0; q < count; ++q) {
      for (std::size_t p = 0; p < count; ++p) {
        const double expected = p == q ? 1.0 : 0.0;
        out.worst = std::max(out.worst, std::abs(b.value(p, b.nodes()[q]) - expected));
        ++out.samples;
      }
    }
  }
  return out;
}

Outcome basis_derivatives(std::uint64_t seed, std::size_t samples) {
  Outcome out{"basis derivatives vs finite differences", 0.0, 1e-6, 0};
  Rng rng(seed);
  constexpr double h = 1e-5;
  const PwlBasis pwl(-1.0, 2.0, 7);
  const GaussBasis gauss({0.5, 1.5, 2.5});
  for (std::size_t i = 0; i < samples; ++i) {
    double x = rng.uniform(-1.5, 2.5);
    while (near_node(pwl, x, 1e-3)) x = rng.uniform(-1.5, 2.5);
    const SparseEval e = pwl.eval(x);
    for (std::size_t a = 0; a < e.indices.size(); ++a) {
      const std::size_t p = e.indices[a];
      const double fd = (pwl.value(p, x + h) - pwl.value(p, x - h)) / (2 * h);
      out.worst = std::max(out.worst, max_relative_error(std::span(&e.derivs[a], 1), std::span(&fd, 1)));
    }
    const double t = rng.uniform(-1.0, 4.0);
    for (std::size_t l = 0; l < gauss.size(); ++l) {
      const double fd = (gauss.value(l, t + h) - gauss.value(l, t - h)) / (2 * h);
      const double an = gauss.deriv(l, t);
      out.worst = std::max(out.worst, std::abs(an - fd) / std::max(std::abs(fd), 1e-3));
    }
    ++out.samples;
  }
  return out;
}

Outcome gauss_second_derivative(std::uint64_t seed, std::size_t samples) {
  Outcome out{"gaussian second derivative vs finite differences", 0.0, 1e-6, 0};
  Rng rng(seed);
  constexpr double h = 1e-5;
  const GaussBasis gauss({0.5, 1.5, 2.5});
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = rng.uniform(-1.0, 4.0);
    for (std::size_t l = 0; l < gauss.size(); ++l) {
      const double fd = (gauss.deriv(l, t + h) - gauss.deriv(l, t - h)) / (2 * h);
      out.worst = std::max(out.worst, std::abs(gauss.second(l, t) - fd) / std::max(std::abs(fd), 1e-3));
    }
    ++out.samples;
  }
  return out;
}

Outcome kaczmarz_projection(std::uint64_t seed, std::size_t trials) {
  Outcome out{"kaczmarz projection exactness (mu = 1)", 0.0, 1e-12, 0};
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t m = 1 + rng.below(6);
    const std::size_t n = 2 + rng.below(8);
    UrysohnModel model(m, PwlBasis(0.0, 1.0, n), random_vector(rng, m * n, -1.0, 1.0));
    const std::vector<double> x = random_vector(rng, m, -0.2, 1.2);
    const double y = rng.uniform(-2.0, 2.0);
    model.kaczmarz_step(x, y, 1.0);
    out.worst = std::max(out.worst, std::abs(model.eval(x) - y));
    ++out.samples;
  }
  return out;
}

Outcome fejer_monotonicity(std::uint64_t seed, std::size_t trials) {
  Outcome out{"fejer monotonicity", 0.0, 1e-12, 0};
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t m = 2 + rng.below(3);
    const PwlBasis basis(0.0, 1.0, 3 + rng.below(5));
    const UrysohnModel truth(m, basis, random_vector(rng, m * basis.size(), -1.0, 1.0));
    UrysohnModel model(m, basis);
    double dist = distance(model.params(), truth.params());
    for (std::size_t q = 0; q < 300; ++q) {
      const std::vector<double> x = random_vector(rng, m, 0.0, 1.0);
      model.kaczmarz_step(x, truth.eval(x), rng.uniform(0.01, 1.99));
      const double next = distance(model.params(), truth.params());
      out.worst = std::max(out.worst, next - dist);
      dist = next;
      ++out.samples;
    }
  }
  return out;
}

Outcome ka_gradient_identity(std::uint64_t seed, std::size_t points) {
  Outcome out{"A/B gradient identity vs finite differences", 0.0, 1e-5, 0};
  Rng rng(seed);
  constexpr double h = 1e-6;
  NkWorkspace ws;
  while (out.samples < points) {
    const std::size_t m = 1 + rng.below(4);
    KaModel model = random_ka(rng, m, 1 + rng.below(2 * m + 1), 3 + rng.below(4), 3 + rng.below(6));
    const std::vector<double> x = random_vector(rng, m, 0.0, 1.0);
    // Keep every theta clear of outer kinks so central differences stay on one segment.
    const std::vector<double> theta = model.theta(x);
    if (std::any_of(theta.begin(), theta.end(), [&](double t) { return near_node(model.outer(), t, 1e-3); })) {
      continue;
    }
    model.eval(x, ws);
    const std::vector<double> a = ws.dense_a(model.s());
    const std::vector<double> b = ws.dense_b(model.n());
    std::vector<double> fd_g(a.size()), fd_h(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double keep = model.g()[i];
      model.g()[i] = keep + h;
      const double up = model.eval(x);
      model.g()[i] = keep - h;
      const double down = model.eval(x);
      model.g()[i] = keep;
      fd_g[i] = (up - down) / (2 * h);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double keep = model.h()[i];
      model.h()[i] = keep + h;
      const double up = model.eval(x);
      model.h()[i] = keep - h;
      const double down = model.eval(x);
      model.h()[i] = keep;
      fd_h[i] = (up - down) / (2 * h);
    }
    out.worst = std::max({out.worst, max_relative_error(a, fd_g), max_relative_error(b, fd_h)});
    ++out.samples;
  }
  return out;
}

Outcome ka_linearized_exactness(std::uint64_t seed, std::size_t trials) {
  Outcome out{"NK linearized exactness (mu = 1)", 0.0, 1e-10, 0};
  Rng rng(seed);
  NkWorkspace ws;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t m = 1 + rng.below(5);
    KaModel model = random_ka(rng, m, 2 * m + 1, 5, 7);
    const std::vector<double> x = random_vector(rng, m, 0.0, 1.0);
    const double y = rng.uniform(-1.0, 2.0);
    const double e = model.eval(x, ws);
    const std::vector<double> a = ws.dense_a(model.s());
    const std::vector<double> b = ws.dense_b(model.n());
    const std::vector<double> g0(model.g().begin(), model.g().end());
    const std::vector<double> h0(model.h().begin(), model.h().end());
    model.nk_step(x, y, 1.0, ws);
    double predicted = y - e;
    for (std::size_t i = 0; i < a.size(); ++i) predicted -= a[i] * (model.g()[i] - g0[i]);
    for (std::size_t i = 0; i < b.size(); ++i) predicted -= b[i] * (model.h()[i] - h0[i]);
    out.worst = std::max(out.worst, std::abs(predicted));
    ++out.samples;
  }
  return out;
}

Outcome ka_tree_equivalence(std::uint64_t seed, std::size_t trials) {
  Outcome out{"KA equals a tree of Urysohn operators", 0.0, 1e-12, 0};
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t m = 1 + rng.below(5);
    const std::size_t k = 1 + rng.below(2 * m + 1);
    const KaModel model = random_ka(rng, m, k, 2 + rng.below(6), 2 + rng.below(8));
    const std::size_t n = model.n(), s = model.s();
    std::vector<double> root_params(k * s);
    std::copy(model.g().begin(), model.g().end(), root_params.begin());
    // The root operator has K inputs, each with its own outer function.
    const UrysohnModel root(k, model.outer(), root_params);
    const std::vector<double> x = random_vector(rng, m, -0.1, 1.1);
    std::vector<double> theta(k);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const auto hk = model.h().subspan(kk * m * n, m * n);
      const UrysohnModel branch(m, model.inner(), std::vector<double>(hk.begin(), hk.end()));
      theta[kk] = branch.eval(x);
    }
    out.worst = std::max(out.worst, std::abs(root.eval(theta) - model.eval(x)));
    ++out.samples;
  }
  return out;
}

namespace {

RidgeModel random_ridge(Rng& rng, Dataset& data) {
  const std::size_t m = 2 + rng.below(4);
  const std::size_t s = 2 + rng.below(3);
  std::vector<double> centers(s);
  for (std::size_t l = 0; l < s; ++l) centers[l] = static_cast<double>(l) + 0.5;
  RidgeModel truth(random_vector(rng, m, -1.0, 1.5), random_vector(rng, s, -1.0, 2.0), GaussBasis(centers));
  data = Dataset(m);
  for (std::size_t i = 0; i < 30; ++i) {
    const std::vector<double> x = random_vector(rng, m, 0.0, 1.0);
    data.push_back(x, truth.eval(x) + rng.uniform(-0.1, 0.1));
  }
  return RidgeModel(random_vector(rng, m, -1.0, 1.5), random_vector(rng, s, -1.0, 2.0), GaussBasis(centers));
}

}  // namespace

Outcome ridge_gradient_identity(std::uint64_t seed, std::size_t points) {
  Outcome out{"sum-of-squares gradient vs finite differences", 0.0, 1e-4, 0};
  Rng rng(seed);
  constexpr double h = 1e-6;
  for (std::size_t t = 0; t < points; ++t) {
    Dataset data;
    RidgeModel model = random_ridge(rng, data);
    const GnSystem sys = assemble_gn_system(model, data);
    const Eigen::VectorXd z = model.stacked();
    std::vector<double> fd(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      model.set_stacked(zp);
      const double up = sum_of_squares(model, data);
      model.set_stacked(zm);
      const double down = sum_of_squares(model, data);
      fd[i] = (up - down) / (2 * h);
    }
    model.set_stacked(z);
    out.worst = std::max(out.worst, max_relative_error(std::span(sys.gradient.data(), fd.size()), fd));
    ++out.samples;
  }
  return out;
}

Outcome ridge_hessian_identity(std::uint64_t seed, std::size_t points) {
  Outcome out{"sum-of-squares Hessian vs finite differences", 0.0, 1e-4, 0};
  Rng rng(seed);
  constexpr double h = 1e-5;
  for (std::size_t t = 0; t < points; ++t) {
    Dataset data;
    RidgeModel model = random_ridge(rng, data);
    const GnSystem sys = assemble_gn_system(model, data);
    const Eigen::VectorXd z = model.stacked();
    const Eigen::Index p = z.size();
    Eigen::MatrixXd fd(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      model.set_stacked(zp);
      const Eigen::VectorXd up = assemble_gn_system(model, data).gradient;
      model.set_stacked(zm);
      const Eigen::VectorXd down = assemble_gn_system(model, data).gradient;
      fd.col(i) = (up - down) / (2 * h);
    }
    model.set_stacked(z);
    out.worst = std::max(out.worst, max_relative_error(std::span(sys.hessian.data(), p * p),
                                                       std::span(fd.data(), p * p)));
    out.worst = std::max(out.worst, (sys.hessian - sys.hessian.transpose()).cwiseAbs().maxCoeff());
    ++out.samples;
  }
  return out;
}

Outcome ka_self_recovery(std::uint64_t seed) {
  Outcome out{"recovery of a self-generated KA model (normalized RMSE)", 0.0, 1e-3, 1};
  Rng rng(seed, Stream::Data);
  const KaModel truth = ka_init(2, 5, 5, 7, 0.0, 1.0, 0.0, 1.0, rng);
  const Dataset train = gen_ka_data(truth, 2000, rng);
  const Dataset val = gen_ka_data(truth, 500, rng);
  KaShape shape;
  shape.x_min = 0.0;
  shape.x_max = 1.0;
  FitConfig config;
  config.mu = 1.0;
  config.passes = 500;
  config.epsilon = 0.0;
  config.seed = seed + 1;
  const KaFit fit = fit_ka(train, val, shape, config);
  out.worst = fit.report.failed ? INFINITY : fit.report.rmse_history.back();
  return out;
}

Outcome ka_local_recovery(std::uint64_t seed, double offset) {
  Outcome out{"recovery of a self-generated KA model from a nearby start", 0.0, 1e-3, 1};
  Rng rng(seed, Stream::Data);
  const KaModel truth = ka_init(2, 5, 5, 7, 0.0, 1.0, 0.0, 1.0, rng);
  const Dataset train = gen_ka_data(truth, 2000, rng);
  const Dataset val = gen_ka_data(truth, 500, rng);
  KaModel start = truth;
  for (double& h : start.h()) h += rng.uniform(-offset, offset);
  for (double& g : start.g()) g += rng.uniform(-offset, offset);
  FitConfig config;
  config.passes = 500;
  config.epsilon = 0.0;
  const KaFit fit = fit_ka(train, val, std::move(start), config);
  out.worst = fit.report.failed ? INFINITY : fit.report.rmse_history.back();
  return out;
}

std::vector<Outcome> full_suite(std::uint64_t seed) {
  return {partition_of_unity(seed),      pwl_nodal_property(),
          basis_derivatives(seed),       gauss_second_derivative(seed),
          kaczmarz_projection(seed),     fejer_monotonicity(seed),
          ka_gradient_identity(seed),    ka_linearized_exactness(seed),
          ka_tree_equivalence(seed),     ridge_gradient_identity(seed),
          ridge_hessian_identity(seed),  ka_local_recovery(seed),
          ka_self_recovery(seed)};
}

}  // namespace kaid::props
