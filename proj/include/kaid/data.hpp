#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace kaid {

struct RecordView {
  std::span<const double> x;
  double y;
};

/// Input-output records with a fixed input dimension. Inputs are stored
/// row-major; the output extrema are maintained on every insertion.
class Dataset {
 public:
  explicit Dataset(std::size_t dim = 0) : dim_(dim) {}

  void push_back(std::span<const double> x, double y);
  void reserve(std::size_t records);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return outputs_.size(); }
  [[nodiscard]] bool empty() const noexcept { return outputs_.empty(); }

  [[nodiscard]] RecordView operator[](std::size_t i) const noexcept {
    return {std::span<const double>(inputs_).subspan(i * dim_, dim_), outputs_[i]};
  }
  [[nodiscard]] std::span<const double> inputs() const noexcept { return inputs_; }
  [[nodiscard]] std::span<const double> outputs() const noexcept { return outputs_; }

  [[nodiscard]] double y_min() const noexcept { return y_min_; }
  [[nodiscard]] double y_max() const noexcept { return y_max_; }

  /// Smallest and largest input value over all records and components.
  [[nodiscard]] std::pair<double, double> input_range() const noexcept;

 private:
  std::size_t dim_;
  std::vector<double> inputs_;
  std::vector<double> outputs_;
  double y_min_ = std::numeric_limits<double>::infinity();
  double y_max_ = -std::numeric_limits<double>::infinity();
};

/// Settings shared by the row-action fitting loops.
struct FitConfig {
  double mu = 1.0;
  std::size_t passes = 100;
  /// Plateau rule: stop once |rmse_p - rmse_{p-1}| < epsilon for `patience`
  /// consecutive passes. epsilon <= 0 disables early stopping.
  double epsilon = 1e-6;
  std::size_t patience = 20;
  bool shuffle = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RunReport {
  std::vector<double> rmse_history;
  std::size_t skipped_steps = 0;
  bool failed = false;
  std::string failure;
  bool stopped_early = false;
  double parameter_norm = 0.0;
  std::string rng = "";
};

/// Tracks the early-stopping plateau rule of FitConfig.
class PlateauMonitor {
 public:
  PlateauMonitor(double epsilon, std::size_t patience) : epsilon_(epsilon), patience_(patience) {}

  /// Returns true when the run should stop after recording `rmse`.
  bool update(double rmse) noexcept;

 private:
  double epsilon_;
  std::size_t patience_;
  double last_ = std::numeric_limits<double>::quiet_NaN();
  std::size_t flat_ = 0;
};

/// Root-mean-square error divided by the output range y_max - y_min.
double rmse_normalized(std::span<const double> y, std::span<const double> yhat, double y_min,
                       double y_max);

/// Record order for one pass: identity unless config.shuffle is set.
class PassOrder {
 public:
  PassOrder(std::size_t records, const FitConfig& config);
  const std::vector<std::size_t>& next();

 private:
  std::vector<std::size_t> order_;
  bool shuffle_;
  std::uint64_t seed_;
  std::uint64_t pass_ = 0;
};

/// CSV with header x1,...,xm,y. Values are written in shortest round-trip form.
void save_csv(const Dataset& data, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view text, bool& ok);

}  // namespace kaid
