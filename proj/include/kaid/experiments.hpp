#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kaid/ridge.hpp"

namespace kaid {

enum class Method { NewtonKaczmarz, GaussNewton };

std::string method_name(Method method);

/// Ridge identification study: for every alpha, `ensembles` x `runs` runs,
/// each with fresh data and a perturbed initial guess.
struct EnsembleSpec {
  std::vector<double> alphas{0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8};
  std::size_t runs = 100;
  std::size_t ensembles = 5;
  std::vector<double> thresholds{0.05, 0.10, 0.20};
  Method method = Method::NewtonKaczmarz;
  std::uint64_t base_seed = 0;
  std::size_t records = 400;
  double nk_mu = 0.1;
  /// Single-record steps; with nk_steps_are_passes each unit is a full pass.
  std::size_t nk_steps = 10000;
  bool nk_steps_are_passes = false;
  GnOptions gn;
  std::size_t jobs = 1;

  void validate() const;
};

struct RunOutcome {
  double alpha = 0.0;
  std::size_t ensemble = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  bool converged = false;  // GN convergence flag; NK runs report true unless failed
  bool failed = false;
};

/// Mean and sample standard deviation across ensembles.
struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct AlphaSummary {
  double alpha = 0.0;
  std::vector<Stat> below;     // one per threshold, in runs out of `runs`
  Stat converged;              // GN only: converged runs
  Stat converged_rmse;         // GN only: mean RMSE of converged runs, in percent
};

struct EnsembleResult {
  EnsembleSpec spec;
  std::vector<RunOutcome> runs;
  std::vector<AlphaSummary> summary;
};

/// Seed of run `index` (counted across ensembles) in a study with `base`.
std::uint64_t run_seed(std::uint64_t base, std::size_t index) noexcept;

RunOutcome run_ridge_trial(const EnsembleSpec& spec, double alpha, std::size_t ensemble,
                           std::size_t run);
EnsembleResult run_ensemble(const EnsembleSpec& spec);

void write_ensemble_runs_csv(const EnsembleResult& result, const std::filesystem::path& path);
void write_ensemble_summary_csv(const EnsembleResult& result, const std::filesystem::path& path);

/// Reference ensemble statistics (runs out of 100, RMSE in percent).
struct ReferenceRow {
  double alpha;
  Stat below[3];
  Stat converged;
  Stat converged_rmse;
};
std::optional<ReferenceRow> reference_row(Method method, double alpha);

struct Band {
  double lo;
  double hi;
  [[nodiscard]] bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};
/// mean +- max(3 sigma, 5), clipped to [0, 100].
Band acceptance_band(const Stat& reference);

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

/// Band checks of one ensemble study against the reference statistics.
std::vector<CheckLine> check_ensemble(const EnsembleResult& result);
/// NK beats GN on the 10% threshold at every alpha studied by both.
std::vector<CheckLine> check_method_ordering(const EnsembleResult& nk, const EnsembleResult& gn);

/// Kolmogorov-Arnold convergence study on the five-input test function.
struct ConvergenceSpec {
  std::vector<double> mus{1.0, 0.3, 0.1};
  std::size_t passes = 500;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 0;
  std::size_t train_records = 10000;
  std::size_t validation_records = 2000;
  std::size_t n = 5;
  std::size_t s = 7;
  std::size_t jobs = 1;

  void validate() const;
};

struct ConvergenceRun {
  double mu = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<double> rmse;  // validation RMSE after each pass
  bool failed = false;
};

struct ConvergenceResult {
  ConvergenceSpec spec;
  std::vector<ConvergenceRun> runs;
};

ConvergenceResult run_convergence(const ConvergenceSpec& spec);

/// Long format: mu,run,pass,rmse.
void write_convergence_csv(const ConvergenceResult& result, const std::filesystem::path& path);
/// Log-log chart, one polyline per (mu, run).
void write_convergence_svg(const ConvergenceResult& result, const std::filesystem::path& path);

/// Mean over runs of the RMSE after `pass` (1-based) for one mu.
double mean_rmse_at(const ConvergenceResult& result, double mu, std::size_t pass);
/// R^2 of the least-squares line log(rmse) ~ log(pass) over [first, last],
/// using the run-averaged RMSE for `mu`.
double loglog_r2(const ConvergenceResult& result, double mu, std::size_t first, std::size_t last);

std::vector<CheckLine> check_convergence(const ConvergenceResult& result);

}  // namespace kaid
