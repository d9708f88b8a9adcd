#include "kaid/generators.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "kaid/error.hpp"
#include "kaid/ridge.hpp"

namespace kaid {

namespace {

void require_records(std::size_t records) {
  if (records < 1) fail(ErrorCode::InvalidArgument, "at least one record must be generated");
}

}  // namespace

Dataset gen_ridge_data(std::size_t records, Rng& rng) {
  require_records(records);
  const RidgeModel model = reference_ridge_model();
  Dataset out(model.m());
  out.reserve(records);
  std::vector<double> x(model.m());
  for (std::size_t i = 0; i < records; ++i) {
    for (double& v : x) v = rng.uniform();
    out.push_back(x, model.eval(x));
  }
  return out;
}

double formula2(std::span<const double> x) {
  if (x.size() != 5) fail(ErrorCode::DimensionMismatch, "formula2 takes exactly 5 inputs");
  constexpr double pi = std::numbers::pi;
  const double stretch = 20.0 * std::exp(x[4]);
  const double front1 = std::atan(stretch * (x[0] - 0.5 + x[1] / 6.0)) + pi / 2.0;
  const double front2 = std::atan(stretch * (x[0] - 0.5 - x[1] / 6.0)) + pi / 2.0;
  return (2.0 + 2.0 * x[2]) / (3.0 * pi) * front1 + (2.0 + 2.0 * x[3]) / (3.0 * pi) * front2;
}

Dataset gen_formula2_data(std::size_t records, Rng& rng) {
  require_records(records);
  Dataset out(5);
  out.reserve(records);
  std::vector<double> x(5);
  for (std::size_t i = 0; i < records; ++i) {
    for (double& v : x) v = rng.uniform();
    out.push_back(x, formula2(x));
  }
  return out;
}

Dataset gen_ka_data(const KaModel& model, std::size_t records, Rng& rng) {
  require_records(records);
  Dataset out(model.m());
  out.reserve(records);
  std::vector<double> x(model.m());
  NkWorkspace ws;
  for (std::size_t i = 0; i < records; ++i) {
    for (double& v : x) v = rng.uniform(model.inner().lo(), model.inner().hi());
    out.push_back(x, model.eval(x, ws));
  }
  return out;
}

}  // namespace kaid
