#include "kaid/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "kaid/error.hpp"
#include "kaid/generators.hpp"
#include "kaid/kolmogorov_arnold.hpp"

namespace kaid {

std::string method_name(Method method) {
  return method == Method::NewtonKaczmarz ? "nk" : "gn";
}

std::uint64_t run_seed(std::uint64_t base, std::size_t index) noexcept {
  return base ^ static_cast<std::uint64_t>(index);
}

namespace {

/// Runs task(i) for i in [0, count) on up to `jobs` threads. Results must be
/// written to per-index slots so the outcome is independent of scheduling.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

Stat stat_of(const std::vector<double>& xs) {
  Stat st;
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return st;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

void EnsembleSpec::validate() const {
  if (runs < 1) fail(ErrorCode::InvalidArgument, "an ensemble needs at least one run");
  if (ensembles < 1) fail(ErrorCode::InvalidArgument, "at least one ensemble is required");
  if (alphas.empty()) fail(ErrorCode::InvalidArgument, "no perturbation amplitudes given");
  if (thresholds.empty() || !std::is_sorted(thresholds.begin(), thresholds.end())) {
    fail(ErrorCode::InvalidArgument, "thresholds must be non-empty and ascending");
  }
  if (records < 1) fail(ErrorCode::InvalidArgument, "records must be at least 1");
  require_relaxation(nk_mu);
}

RunOutcome run_ridge_trial(const EnsembleSpec& spec, double alpha, std::size_t ensemble,
                           std::size_t run) {
  RunOutcome out;
  out.alpha = alpha;
  out.ensemble = ensemble;
  out.run = run;
  out.seed = run_seed(spec.base_seed, ensemble * spec.runs + run);

  Rng data_rng(out.seed, Stream::Data);
  const Dataset data = gen_ridge_data(spec.records, data_rng);
  Rng init_rng(out.seed, Stream::Init);
  RidgeModel init = perturbed_ridge_model(reference_ridge_model(), alpha, init_rng);

  if (spec.method == Method::NewtonKaczmarz) {
    const std::size_t steps = spec.nk_steps_are_passes ? spec.nk_steps * data.size() : spec.nk_steps;
    const RidgeNkResult fit = fit_ridge_nk(data, std::move(init), spec.nk_mu, steps);
    out.failed = fit.failed;
    out.converged = !fit.failed;
    out.rmse = fit.failed ? std::numeric_limits<double>::infinity() : ridge_rmse(fit.model, data);
  } else {
    const GnResult fit = fit_ridge_gn(data, std::move(init), spec.gn);
    out.failed = fit.failed;
    out.converged = fit.converged;
    out.rmse = fit.model.finite() ? ridge_rmse(fit.model, data)
                                  : std::numeric_limits<double>::infinity();
  }
  if (!std::isfinite(out.rmse)) {
    out.failed = true;
    out.converged = false;
    out.rmse = std::numeric_limits<double>::infinity();
  }
  return out;
}

EnsembleResult run_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  EnsembleResult result;
  result.spec = spec;
  const std::size_t per_alpha = spec.ensembles * spec.runs;
  result.runs.resize(spec.alphas.size() * per_alpha);
  parallel_for(result.runs.size(), spec.jobs, [&](std::size_t i) {
    const std::size_t a = i / per_alpha;
    const std::size_t rem = i % per_alpha;
    result.runs[i] = run_ridge_trial(spec, spec.alphas[a], rem / spec.runs, rem % spec.runs);
  });

  for (std::size_t a = 0; a < spec.alphas.size(); ++a) {
    AlphaSummary sum;
    sum.alpha = spec.alphas[a];
    std::vector<std::vector<double>> below(spec.thresholds.size());
    std::vector<double> converged;
    std::vector<double> converged_rmse;
    for (std::size_t e = 0; e < spec.ensembles; ++e) {
      std::vector<double> counts(spec.thresholds.size(), 0.0);
      double conv = 0.0;
      double conv_rmse = 0.0;
      for (std::size_t r = 0; r < spec.runs; ++r) {
        const RunOutcome& run = result.runs[a * per_alpha + e * spec.runs + r];
        for (std::size_t t = 0; t < spec.thresholds.size(); ++t) {
          if (!run.failed && run.rmse < spec.thresholds[t]) counts[t] += 1.0;
        }
        if (run.converged) {
          conv += 1.0;
          conv_rmse += run.rmse;
        }
      }
      // Counts are scaled to runs out of 100 so they compare with the reference statistics.
      const double scale = 100.0 / static_cast<double>(spec.runs);
      for (std::size_t t = 0; t < spec.thresholds.size(); ++t) below[t].push_back(counts[t] * scale);
      converged.push_back(conv * scale);
      if (conv > 0.0) converged_rmse.push_back(100.0 * conv_rmse / conv);
    }
    for (const auto& b : below) sum.below.push_back(stat_of(b));
    sum.converged = stat_of(converged);
    sum.converged_rmse = stat_of(converged_rmse);
    result.summary.push_back(sum);
  }
  return result;
}

void write_ensemble_runs_csv(const EnsembleResult& result, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "method,alpha,ensemble,run,seed,rmse,converged,failed\n";
  const std::string method = method_name(result.spec.method);
  for (const RunOutcome& r : result.runs) {
    os << method << ',' << format_double(r.alpha) << ',' << r.ensemble << ',' << r.run << ','
       << r.seed << ',' << (std::isfinite(r.rmse) ? format_double(r.rmse) : std::string("inf"))
       << ',' << (r.converged ? 1 : 0) << ',' << (r.failed ? 1 : 0) << '\n';
  }
  write_text(path, os.str());
}

void write_ensemble_summary_csv(const EnsembleResult& result, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "method,alpha,metric,threshold,mean,std\n";
  const std::string method = method_name(result.spec.method);
  for (const AlphaSummary& s : result.summary) {
    for (std::size_t t = 0; t < result.spec.thresholds.size(); ++t) {
      os << method << ',' << format_double(s.alpha) << ",below," << format_double(result.spec.thresholds[t])
         << ',' << fixed(s.below[t].mean, 4) << ',' << fixed(s.below[t].stddev, 4) << '\n';
    }
    if (result.spec.method == Method::GaussNewton) {
      os << method << ',' << format_double(s.alpha) << ",converged,," << fixed(s.converged.mean, 4)
         << ',' << fixed(s.converged.stddev, 4) << '\n';
      os << method << ',' << format_double(s.alpha) << ",converged_rmse_percent,,"
         << fixed(s.converged_rmse.mean, 4) << ',' << fixed(s.converged_rmse.stddev, 4) << '\n';
    }
  }
  write_text(path, os.str());
}

std::optional<ReferenceRow> reference_row(Method method, double alpha) {
  // Runs out of 100 below 5/10/20% error, converged runs, converged-run RMSE (%).
  static const ReferenceRow kGn[] = {
      {0.4, {{93.6, 1.3}, {93.8, 1.1}, {99.2, 0.4}}, {99.4, 0.5}, {0.8, 0.2}},
      {0.8, {{59.0, 5.2}, {59.0, 5.2}, {80.0, 4.8}}, {83.2, 5.5}, {4.3, 0.1}},
      {1.2, {{31.4, 1.7}, {32.6, 2.3}, {55.0, 6.4}}, {62.4, 7.2}, {8.3, 1.1}},
      {1.6, {{12.4, 2.1}, {13.6, 2.3}, {33.8, 2.9}}, {40.8, 3.6}, {11.9, 1.0}},
      {2.0, {{5.0, 2.1}, {5.6, 1.9}, {21.8, 4.8}}, {29.8, 7.2}, {15.1, 2.8}},
      {2.4, {{2.0, 1.6}, {2.2, 1.9}, {11.0, 3.1}}, {22.2, 2.9}, {22.1, 2.5}},
      {2.8, {{0.4, 0.5}, {1.2, 0.8}, {7.4, 2.9}}, {19.6, 5.6}, {24.7, 3.1}},
  };
  static const ReferenceRow kNk[] = {
      {0.4, {{98.4, 0.9}, {99.8, 0.4}, {100.0, 0.0}}, {}, {}},
      {0.8, {{78.2, 3.0}, {95.0, 2.0}, {98.8, 1.1}}, {}, {}},
      {1.2, {{49.4, 4.7}, {78.0, 7.2}, {90.8, 3.8}}, {}, {}},
      {1.6, {{35.8, 4.1}, {56.2, 3.6}, {75.4, 1.7}}, {}, {}},
      {2.0, {{24.8, 2.6}, {42.2, 4.3}, {64.4, 3.2}}, {}, {}},
      {2.4, {{16.0, 5.1}, {30.2, 5.8}, {48.0, 5.3}}, {}, {}},
      {2.8, {{13.0, 4.3}, {20.4, 4.5}, {34.8, 7.2}}, {}, {}},
  };
  const auto& table = method == Method::GaussNewton ? kGn : kNk;
  for (const ReferenceRow& row : table) {
    if (std::abs(row.alpha - alpha) < 1e-9) return row;
  }
  return std::nullopt;
}

Band acceptance_band(const Stat& reference) {
  const double half = std::max(3.0 * reference.stddev, 5.0);
  return {std::max(0.0, reference.mean - half), std::min(100.0, reference.mean + half)};
}

std::vector<CheckLine> check_ensemble(const EnsembleResult& result) {
  std::vector<CheckLine> lines;
  const std::string method = method_name(result.spec.method);
  static const double kThresholds[] = {0.05, 0.10, 0.20};
  for (const AlphaSummary& s : result.summary) {
    const auto ref = reference_row(result.spec.method, s.alpha);
    if (!ref) continue;
    const auto add = [&](const std::string& what, const Stat& reference, double value) {
      const Band band = acceptance_band(reference);
      std::ostringstream os;
      os << fixed(value, 2) << " in [" << fixed(band.lo, 1) << ", " << fixed(band.hi, 1)
         << "] (reference " << fixed(reference.mean, 1) << " +- " << fixed(reference.stddev, 1) << ")";
      lines.push_back({method + " alpha=" + fixed(s.alpha, 1) + " " + what, band.contains(value), os.str()});
    };
    for (std::size_t t = 0; t < result.spec.thresholds.size(); ++t) {
      for (std::size_t r = 0; r < 3; ++r) {
        if (std::abs(result.spec.thresholds[t] - kThresholds[r]) < 1e-12) {
          add("err<" + fixed(100.0 * kThresholds[r], 0) + "%", ref->below[r], s.below[t].mean);
        }
      }
    }
    if (result.spec.method == Method::GaussNewton) {
      add("converged", ref->converged, s.converged.mean);
      add("converged-run RMSE %", ref->converged_rmse, s.converged_rmse.mean);
    }
  }
  return lines;
}

std::vector<CheckLine> check_method_ordering(const EnsembleResult& nk, const EnsembleResult& gn) {
  std::vector<CheckLine> lines;
  const auto index_of = [](const EnsembleSpec& spec, double threshold) -> std::optional<std::size_t> {
    for (std::size_t t = 0; t < spec.thresholds.size(); ++t) {
      if (std::abs(spec.thresholds[t] - threshold) < 1e-12) return t;
    }
    return std::nullopt;
  };
  const auto tn = index_of(nk.spec, 0.10);
  const auto tg = index_of(gn.spec, 0.10);
  if (!tn || !tg) return lines;
  for (const AlphaSummary& a : nk.summary) {
    for (const AlphaSummary& b : gn.summary) {
      if (std::abs(a.alpha - b.alpha) > 1e-9) continue;
      const double vn = a.below[*tn].mean;
      const double vg = b.below[*tg].mean;
      lines.push_back({"ordering alpha=" + fixed(a.alpha, 1) + " nk>gn at err<10%", vn > vg,
                       "nk " + fixed(vn, 2) + " vs gn " + fixed(vg, 2)});
    }
  }
  return lines;
}

void ConvergenceSpec::validate() const {
  if (mus.empty()) fail(ErrorCode::InvalidArgument, "no relaxation parameters given");
  for (double mu : mus) require_relaxation(mu);
  if (passes < 1) fail(ErrorCode::InvalidArgument, "passes must be at least 1");
  if (seeds < 1) fail(ErrorCode::InvalidArgument, "seeds must be at least 1");
  if (train_records < 1 || validation_records < 1) {
    fail(ErrorCode::InvalidArgument, "train and validation sets must be non-empty");
  }
}

ConvergenceResult run_convergence(const ConvergenceSpec& spec) {
  spec.validate();
  ConvergenceResult result;
  result.spec = spec;
  result.runs.resize(spec.mus.size() * spec.seeds);
  parallel_for(result.runs.size(), spec.jobs, [&](std::size_t i) {
    ConvergenceRun& run = result.runs[i];
    run.mu = spec.mus[i / spec.seeds];
    run.run = i % spec.seeds;
    run.seed = run_seed(spec.base_seed, run.run);
    Rng data_rng(run.seed, Stream::Data);
    const Dataset train = gen_formula2_data(spec.train_records, data_rng);
    const Dataset validation = gen_formula2_data(spec.validation_records, data_rng);
    FitConfig config;
    config.mu = run.mu;
    config.passes = spec.passes;
    config.epsilon = 0.0;
    config.seed = run.seed;
    KaShape shape;
    shape.n = spec.n;
    shape.s = spec.s;
    shape.x_min = 0.0;
    shape.x_max = 1.0;
    const KaFit fit = fit_ka(train, validation, shape, config);
    run.rmse = fit.report.rmse_history;
    run.failed = fit.report.failed;
  });
  return result;
}

void write_convergence_csv(const ConvergenceResult& result, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "mu,run,pass,rmse\n";
  for (const ConvergenceRun& r : result.runs) {
    for (std::size_t p = 0; p < r.rmse.size(); ++p) {
      os << format_double(r.mu) << ',' << r.run << ',' << (p + 1) << ',' << format_double(r.rmse[p]) << '\n';
    }
  }
  write_text(path, os.str());
}

void write_convergence_svg(const ConvergenceResult& result, const std::filesystem::path& path) {
  constexpr double kWidth = 820.0, kHeight = 520.0;
  constexpr double kLeft = 80.0, kRight = 160.0, kTop = 30.0, kBottom = 60.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t max_pass = 1;
  for (const ConvergenceRun& r : result.runs) {
    max_pass = std::max(max_pass, r.rmse.size());
    for (double v : r.rmse) {
      if (v > 0.0 && std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!(lo < hi)) {
    lo = 1e-3;
    hi = 1.0;
  }
  const double ylo = std::floor(std::log10(lo));
  const double yhi = std::ceil(std::log10(hi));
  const double xhi = std::max(1.0, std::log10(static_cast<double>(max_pass)));
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double pass) { return kLeft + std::log10(pass) / xhi * plot_w; };
  const auto py = [&](double v) { return kTop + (yhi - std::log10(v)) / (yhi - ylo) * plot_h; };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = 0.0; d <= xhi + 1e-9; d += 1.0) {
    const double x = kLeft + d / xhi * plot_w;
    os << "<line x1=\"" << fixed(x, 2) << "\" y1=\"" << kTop << "\" x2=\"" << fixed(x, 2) << "\" y2=\""
       << kTop + plot_h << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << fixed(x, 2) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">1e"
       << static_cast<int>(d) << "</text>\n";
  }
  for (double d = ylo; d <= yhi + 1e-9; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
       << fixed(y, 2) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << fixed(y + 4, 2) << "\" text-anchor=\"end\">1e"
       << static_cast<int>(d) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\">passes</text>\n";
  os << "<text x=\"20\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << kTop + plot_h / 2 << ")\">validation RMSE (normalized)</text>\n";

  for (std::size_t mi = 0; mi < result.spec.mus.size(); ++mi) {
    const char* color = kColors[mi % std::size(kColors)];
    for (const ConvergenceRun& r : result.runs) {
      if (r.mu != result.spec.mus[mi] || r.rmse.empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-opacity=\"0.6\" points=\"";
      for (std::size_t p = 0; p < r.rmse.size(); ++p) {
        if (!(r.rmse[p] > 0.0) || !std::isfinite(r.rmse[p])) continue;
        os << fixed(px(static_cast<double>(p + 1)), 2) << ',' << fixed(py(r.rmse[p]), 2) << ' ';
      }
      os << "\"/>\n";
    }
    const double ly = kTop + 20.0 + 20.0 * static_cast<double>(mi);
    os << "<line x1=\"" << kWidth - kRight + 20 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 50
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 56 << "\" y=\"" << ly + 4 << "\">mu = "
       << format_double(result.spec.mus[mi]) << "</text>\n";
  }
  os << "</svg>\n";
  write_text(path, os.str());
}

double mean_rmse_at(const ConvergenceResult& result, double mu, std::size_t pass) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const ConvergenceRun& r : result.runs) {
    if (r.mu != mu) continue;
    if (r.failed || pass == 0 || pass > r.rmse.size()) return std::numeric_limits<double>::infinity();
    sum += r.rmse[pass - 1];
    ++count;
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

double loglog_r2(const ConvergenceResult& result, double mu, std::size_t first, std::size_t last) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t p = first; p <= last; ++p) {
    const double v = mean_rmse_at(result, mu, p);
    if (!(v > 0.0) || !std::isfinite(v)) return 0.0;
    xs.push_back(std::log(static_cast<double>(p)));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 3) return 0.0;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

std::vector<CheckLine> check_convergence(const ConvergenceResult& result) {
  std::vector<CheckLine> lines;
  const std::size_t last = result.spec.passes;
  const auto has_mu = [&](double mu) {
    return std::find(result.spec.mus.begin(), result.spec.mus.end(), mu) != result.spec.mus.end();
  };
  if (has_mu(1.0)) {
    const double final_rmse = mean_rmse_at(result, 1.0, last);
    lines.push_back({"mu=1 final validation RMSE <= 1%", final_rmse <= 0.01,
                     "mean RMSE after " + std::to_string(last) + " passes = " + fixed(100.0 * final_rmse, 3) + "%"});
    if (last >= 20) {
      const double r2 = loglog_r2(result, 1.0, 10, std::min<std::size_t>(last, 500));
      lines.push_back({"mu=1 log-log linearity R^2 >= 0.9", r2 >= 0.9,
                       "R^2 over passes 10-" + std::to_string(std::min<std::size_t>(last, 500)) + " = " + fixed(r2, 4)});
    }
  }
  if (result.spec.mus.size() >= 2) {
    std::vector<double> mus = result.spec.mus;
    std::sort(mus.begin(), mus.end());
    bool ordered = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < mus.size(); ++i) {
      const double v = mean_rmse_at(result, mus[i], last);
      os << (i ? ", " : "") << "mu=" << format_double(mus[i]) << ": " << fixed(100.0 * v, 3) << "%";
      if (i > 0 && !(mean_rmse_at(result, mus[i - 1], last) > v)) ordered = false;
    }
    lines.push_back({"smaller mu gives larger RMSE at final pass", ordered, os.str()});
  }
  return lines;
}

}  // namespace kaid
