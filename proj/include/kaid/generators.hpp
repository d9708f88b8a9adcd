#pragma once

#include <cstddef>
#include <span>

#include "kaid/data.hpp"
#include "kaid/kolmogorov_arnold.hpp"
#include "kaid/rng.hpp"

namespace kaid {

/// Records with x ~ unif(0,1)^5 and y from reference_ridge_model().
Dataset gen_ridge_data(std::size_t records, Rng& rng);

/// Five-input test function made of two steep arctan fronts:
///   y = (2 + 2 x3) / (3 pi) (atan(20 (x1 - 1/2 + x2/6) e^x5) + pi/2)
///     + (2 + 2 x4) / (3 pi) (atan(20 (x1 - 1/2 - x2/6) e^x5) + pi/2)
double formula2(std::span<const double> x);

/// Records with x ~ unif(0,1)^5 and y = formula2(x).
Dataset gen_formula2_data(std::size_t records, Rng& rng);

/// Records with x ~ unif(x_min, x_max)^m and y from `model` (exactly representable data).
Dataset gen_ka_data(const KaModel& model, std::size_t records, Rng& rng);

}  // namespace kaid
