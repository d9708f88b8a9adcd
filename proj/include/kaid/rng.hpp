#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kaid {

/// Independent random streams derived from one user seed.
enum class Stream : std::uint64_t {
  Data = 1,
  Init = 2,
  Shuffle = 3,
};

/// Seeded 64-bit generator used everywhere randomness is needed.
///
/// The engine is std::mt19937_64, seeded with splitmix64(seed ^ stream tag).
/// Uniform reals are built from the top 53 bits of one engine draw, so the
/// sequence is identical across standard library implementations (unlike
/// std::uniform_real_distribution, whose algorithm is unspecified).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, Stream stream = Stream::Data);

  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer on [0, bound), bound > 0; rejection sampling, no bias.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t next() noexcept { return engine_(); }

  static constexpr std::string_view algorithm() noexcept {
    return "mt19937_64(splitmix64(seed^stream)),u53";
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace kaid
