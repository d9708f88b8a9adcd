#include <doctest.h>

#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "kaid/error.hpp"
#include "kaid/rng.hpp"
#include "kaid/urysohn.hpp"
#include "properties.hpp"

using namespace kaid;
using doctest::Approx;

namespace {

std::vector<double> draw(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double validation_rmse(const UrysohnModel& model, const Dataset& data) {
  std::vector<double> yhat(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) yhat[i] = model.eval(data[i].x);
  return rmse_normalized(data.outputs(), yhat, data.y_min(), data.y_max());
}

double stddev_tail(const std::vector<double>& v, std::size_t tail) {
  const auto first = v.end() - static_cast<std::ptrdiff_t>(tail);
  const double mean = std::accumulate(first, v.end(), 0.0) / tail;
  double ss = 0.0;
  for (auto it = first; it != v.end(); ++it) ss += (*it - mean) * (*it - mean);
  return std::sqrt(ss / (tail - 1));
}

}  // namespace

TEST_CASE("urysohn eval") {
  const PwlBasis unit(0, 1, 2);
  CHECK(UrysohnModel(3, PwlBasis(0, 1, 4)).eval(std::vector<double>{0.2, 0.5, 0.9}) == 0.0);
  CHECK(UrysohnModel(1, unit, {3.0, 7.0}).eval(std::vector<double>{0.5}) == Approx(5.0));

  Rng rng(4);
  const PwlBasis b(0, 1, 5);
  const UrysohnModel model(3, b, draw(rng, 15, -1, 1));
  const std::vector<double> x{0.25, 1.0, 0.0};
  CHECK(model.eval(x) == model.at(0, 1) + model.at(1, 4) + model.at(2, 0));
}

TEST_CASE("urysohn eval is linear in U") {
  Rng rng(5);
  const PwlBasis b(-1, 2, 6);
  const auto u1 = draw(rng, 24, -1, 1), u2 = draw(rng, 24, -1, 1);
  std::vector<double> sum(24);
  for (std::size_t i = 0; i < 24; ++i) sum[i] = u1[i] + u2[i];
  for (int t = 0; t < 100; ++t) {
    const auto x = draw(rng, 4, -1.5, 2.5);
    const double lhs = UrysohnModel(4, b, sum).eval(x);
    const double rhs = UrysohnModel(4, b, u1).eval(x) + UrysohnModel(4, b, u2).eval(x);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("urysohn rejects wrong dimensions") {
  const UrysohnModel model(2, PwlBasis(0, 1, 3));
  CHECK_THROWS_AS((void)model.eval(std::vector<double>{0.1}), Error);
  CHECK_THROWS_AS(UrysohnModel(2, PwlBasis(0, 1, 3), std::vector<double>(5)), Error);
  CHECK_THROWS_AS(UrysohnModel(0, PwlBasis(0, 1, 3)), Error);
}

TEST_CASE("kaczmarz step projects onto the record and is sparse") {
  Rng rng(6);
  UrysohnModel model(4, PwlBasis(0, 1, 6), draw(rng, 24, -1, 1));
  const std::vector<double> before(model.params().begin(), model.params().end());
  const auto x = draw(rng, 4);
  model.kaczmarz_step(x, 0.75, 1.0);
  CHECK(std::abs(model.eval(x) - 0.75) <= 1e-12);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < before.size(); ++i) changed += before[i] != model.params()[i];
  CHECK(changed <= 2 * 4);

  CHECK_THROWS_AS(model.kaczmarz_step(x, 0.0, 0.0), Error);
  CHECK_THROWS_AS(model.kaczmarz_step(x, 0.0, 2.0), Error);
}

TEST_CASE("kaczmarz properties") {
  for (const auto& o : {props::kaczmarz_projection(7), props::fejer_monotonicity(8)}) {
    INFO(o.name << " worst " << o.worst);
    CHECK(o.pass());
  }
}

TEST_CASE("two-record system converges to the least-norm solution") {
  Rng rng(9);
  const std::size_t m = 3;
  const PwlBasis b(0, 1, 4);
  const std::size_t p = m * b.size();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(p));
  std::vector<std::vector<double>> xs;
  Eigen::Vector2d y(rng.uniform(-1, 1), rng.uniform(-1, 1));
  for (int i = 0; i < 2; ++i) {
    xs.push_back(draw(rng, m));
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = 0; l < b.size(); ++l) rows(i, static_cast<Eigen::Index>(j * b.size() + l)) = b.value(l, xs[i][j]);
    }
  }
  const Eigen::VectorXd least_norm = rows.transpose() * (rows * rows.transpose()).ldlt().solve(y);

  UrysohnModel model(m, b);
  for (int sweep = 0; sweep < 10000; ++sweep) {
    model.kaczmarz_step(xs[0], y[0], 1.0);
    model.kaczmarz_step(xs[1], y[1], 1.0);
  }
  for (int i = 0; i < 2; ++i) CHECK(std::abs(model.eval(xs[i]) - y[i]) <= 1e-10);
  for (std::size_t i = 0; i < p; ++i) CHECK(model.params()[i] == Approx(least_norm[static_cast<Eigen::Index>(i)]).epsilon(1e-9));
}

TEST_CASE("fit recovers a generating Urysohn model") {
  Rng rng(10);
  const PwlBasis b(0, 1, 6);
  const UrysohnModel truth(3, b, draw(rng, 18, -1, 1));
  Dataset train(3), val(3);
  for (int i = 0; i < 300; ++i) {
    const auto x = draw(rng, 3);
    train.push_back(x, truth.eval(x));
  }
  for (int i = 0; i < 200; ++i) {
    const auto x = draw(rng, 3);
    val.push_back(x, truth.eval(x));
  }
  FitConfig config;
  config.passes = 200;
  config.epsilon = 0.0;
  const UrysohnFit fit = fit_urysohn(train, b, config);
  CHECK(fit.report.rmse_history.size() == 200);
  CHECK(validation_rmse(fit.model, val) <= 1e-6);
}

TEST_CASE("smaller mu narrows the oscillation band on noisy data") {
  Rng rng(11);
  const PwlBasis b(0, 1, 6);
  const UrysohnModel truth(2, b, draw(rng, 12, -1, 1));
  Dataset noisy(2);
  for (int i = 0; i < 400; ++i) {
    const auto x = draw(rng, 2);
    noisy.push_back(x, truth.eval(x) + rng.uniform(-0.1, 0.1));
  }
  FitConfig config;
  config.passes = 300;
  config.epsilon = 0.0;
  config.shuffle = true;
  config.mu = 1.0;
  const auto wide = fit_urysohn(noisy, b, config).report.rmse_history;
  config.mu = 0.05;
  const auto narrow = fit_urysohn(noisy, b, config).report.rmse_history;
  CHECK(stddev_tail(narrow, 50) < stddev_tail(wide, 50));
}

TEST_CASE("fit edge cases") {
  const PwlBasis b(0, 1, 3);
  FitConfig config;
  CHECK_THROWS_AS(fit_urysohn(Dataset(2), b, config), Error);

  Dataset one(2);
  one.push_back(std::vector<double>{0.3, 0.8}, 1.25);
  config.passes = 1;
  const UrysohnFit fit = fit_urysohn(one, b, config);
  CHECK(fit.model.eval(one[0].x) == Approx(1.25).epsilon(1e-14));

  config.mu = 2.0;
  CHECK_THROWS_AS(fit_urysohn(one, b, config), Error);
}

TEST_CASE("plateau rule stops early") {
  Dataset data(1);
  for (int i = 0; i <= 10; ++i) data.push_back(std::vector<double>{i / 10.0}, i / 10.0);
  FitConfig config;
  config.passes = 1000;
  config.epsilon = 1e-6;
  config.patience = 5;
  const UrysohnFit fit = fit_urysohn(data, PwlBasis(0, 1, 2), config);
  CHECK(fit.report.stopped_early);
  CHECK(fit.report.rmse_history.size() < 1000);
}

TEST_CASE("series to records") {
  const std::vector<double> x{1, 2, 3, 4}, z{10, 20, 30, 40};
  const Dataset d = series_to_records(x, z, 2);
  REQUIRE(d.size() == 3);
  CHECK(d[0].x[0] == 2);
  CHECK(d[0].x[1] == 1);
  CHECK(d[0].y == 20);
  CHECK(d[2].x[0] == 4);
  CHECK(d[2].x[1] == 3);
  CHECK(d[2].y == 40);

  const Dataset pairs = series_to_records(x, z, 1);
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[3].x[0] == 4);
  CHECK(pairs[3].y == 40);

  CHECK(series_to_records(x, z, 4).size() == 1);
  try {
    series_to_records(x, z, 5);
    FAIL("expected series-too-short");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeriesTooShort);
  }
  CHECK_THROWS_AS(series_to_records(x, std::vector<double>{1, 2}, 1), Error);
  CHECK_THROWS_AS(series_to_records(x, z, 0), Error);
}
