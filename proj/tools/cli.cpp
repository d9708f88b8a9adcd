#include "cli.hpp"

#include <filesystem>
#include <optional>
#include <tuple>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "kaid/error.hpp"
#include "kaid/experiments.hpp"
#include "kaid/generators.hpp"
#include "kaid/kolmogorov_arnold.hpp"
#include "kaid/ridge.hpp"
#include "kaid/serialization.hpp"
#include "kaid/urysohn.hpp"

namespace kaid::cli {

namespace fs = std::filesystem;

namespace {

struct Global {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::size_t jobs = 1;
  bool check = false;
};

struct GenArgs {
  std::string kind = "formula2";
  std::size_t records = 0;
  std::size_t val_records = 0;
  bool val_set = false;
};

struct FitArgs {
  std::string model = "ka";
  std::string train;
  std::string val;
  FitConfig config;
  std::size_t n = 5;
  std::size_t s = 7;
  std::size_t addends = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  double alpha = 0.0;
  std::string init;
  std::size_t steps = 10000;
  GnOptions gn;
};

struct EvalArgs {
  std::string model;
  std::string data;
};

struct EnsembleArgs {
  std::string method = "both";
  EnsembleSpec spec;
};

const CLI::Validator kRelaxation(
    [](std::string& value) -> std::string {
      bool ok = false;
      const double mu = parse_double(value, ok);
      if (!ok || !(mu > 0.0 && mu < 2.0)) return "mu must lie in (0, 2), got " + value;
      return {};
    },
    "in (0, 2)", "RELAXATION");

fs::path output_path(const Global& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
}

int report_checks(const std::vector<CheckLine>& lines, std::ostream& out) {
  bool all = true;
  for (const CheckLine& l : lines) {
    out << (l.pass ? "PASS  " : "FAIL  ") << l.name << ": " << l.detail << '\n';
    all = all && l.pass;
  }
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_gen(const Global& g, const GenArgs& a, std::ostream& out) {
  Rng rng(g.seed, Stream::Data);
  if (a.kind == "ridge") {
    const Dataset train = gen_ridge_data(a.records ? a.records : 400, rng);
    save_csv(train, output_path(g, "train.csv"));
    out << "wrote " << train.size() << " ridge records to " << output_path(g, "train.csv").string() << '\n';
    if (a.val_set && a.val_records > 0) {
      const Dataset val = gen_ridge_data(a.val_records, rng);
      save_csv(val, output_path(g, "val.csv"));
    }
    return kExitOk;
  }
  if (a.kind == "formula2") {
    const Dataset train = gen_formula2_data(a.records ? a.records : 10000, rng);
    const Dataset val = gen_formula2_data(a.val_set ? a.val_records : 2000, rng);
    save_csv(train, output_path(g, "train.csv"));
    save_csv(val, output_path(g, "val.csv"));
    out << "wrote " << train.size() << " training and " << val.size() << " validation records to "
        << g.out_dir << '\n';
    return kExitOk;
  }
  fail(ErrorCode::InvalidArgument, "unknown dataset kind '" + a.kind + "'");
}

void write_fit_outputs(const Global& g, const AnyModel& model, const RunReport& report, std::ostream& out) {
  save_model(model, output_path(g, "model.json"));
  save_report(report, output_path(g, "report.json"));
  save_history_csv(report, output_path(g, "history.csv"));
  out << "model written to " << output_path(g, "model.json").string() << '\n';
  if (!report.rmse_history.empty()) out << "final rmse " << format_double(report.rmse_history.back()) << '\n';
  if (report.failed) out << "run failed: " << report.failure << '\n';
}

int cmd_fit(const Global& g, FitArgs a, std::ostream& out) {
  const Dataset train = load_csv(a.train);
  const Dataset val = a.val.empty() ? Dataset(train.dim()) : load_csv(a.val);
  a.config.seed = g.seed;

  if (a.model == "urysohn") {
    double lo = a.x_min, hi = a.x_max;
    if (!(lo < hi)) std::tie(lo, hi) = train.input_range();
    const UrysohnFit fit = fit_urysohn(train, PwlBasis(lo, hi, a.n), a.config);
    write_fit_outputs(g, fit.model, fit.report, out);
    return fit.report.failed ? kExitError : kExitOk;
  }
  if (a.model == "ka") {
    KaShape shape;
    shape.addends = a.addends;
    shape.n = a.n;
    shape.s = a.s;
    shape.x_min = a.x_min;
    shape.x_max = a.x_max;
    const KaFit fit = fit_ka(train, val, shape, a.config);
    write_fit_outputs(g, fit.model, fit.report, out);
    return fit.report.failed ? kExitError : kExitOk;
  }
  if (a.model == "ridge-nk" || a.model == "ridge-gn") {
    RidgeModel init = reference_ridge_model();
    if (!a.init.empty()) {
      AnyModel loaded = load_model(a.init);
      if (!std::holds_alternative<RidgeModel>(loaded)) {
        fail(ErrorCode::SchemaMismatch, a.init + " does not hold a ridge model");
      }
      init = std::get<RidgeModel>(loaded);
    } else {
      Rng rng(g.seed, Stream::Init);
      init = perturbed_ridge_model(init, a.alpha, rng);
    }
    RunReport report;
    report.rng = std::string(Rng::algorithm());
    std::optional<RidgeModel> model;
    if (a.model == "ridge-nk") {
      require_relaxation(a.config.mu);
      RidgeNkResult fit = fit_ridge_nk(train, std::move(init), a.config.mu, a.steps);
      report.failed = fit.failed;
      report.skipped_steps = fit.skipped_steps;
      if (fit.failed) report.failure = "non-finite parameters";
      model = std::move(fit.model);
    } else {
      GnResult fit = fit_ridge_gn(train, std::move(init), a.gn);
      report.failed = fit.failed;
      report.failure = fit.failed ? fit.failure : (fit.converged ? "" : "not converged");
      out << "gauss-newton " << (fit.converged ? "converged" : "did not converge") << " after "
          << fit.iterations << " iterations\n";
      model = std::move(fit.model);
    }
    if (model->finite()) report.rmse_history.push_back(ridge_rmse(*model, val.empty() ? train : val));
    report.parameter_norm = model->stacked().norm();
    write_fit_outputs(g, *model, report, out);
    return kExitOk;
  }
  fail(ErrorCode::InvalidArgument, "unknown model kind '" + a.model + "'");
}

int cmd_eval(const Global& g, const EvalArgs& a, std::ostream& out) {
  const AnyModel model = load_model(a.model);
  const Dataset data = load_csv(a.data);
  const std::size_t m = model_inputs(model);
  if (data.dim() != m) {
    std::ostringstream os;
    os << "dataset " << a.data << " has " << data.dim() << " inputs but model " << a.model << " expects " << m;
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  std::vector<double> yhat(data.size());
  std::ostringstream csv;
  csv << "y,yhat\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    yhat[i] = eval_model(model, data[i].x);
    csv << format_double(data[i].y) << ',' << format_double(yhat[i]) << '\n';
  }
  write_text(output_path(g, "predictions.csv"), csv.str());
  const double range = data.y_max() > data.y_min() ? data.y_max() - data.y_min() : 1.0;
  const double rmse = rmse_normalized(data.outputs(), yhat, 0.0, range);
  write_text(output_path(g, "metrics.csv"),
             "records,rmse\n" + std::to_string(data.size()) + "," + format_double(rmse) + "\n");
  out << "rmse " << format_double(rmse) << '\n';
  return kExitOk;
}

int cmd_ensemble(const Global& g, EnsembleArgs a, std::ostream& out) {
  a.spec.base_seed = g.seed;
  a.spec.jobs = g.jobs;
  std::vector<Method> methods;
  if (a.method == "nk" || a.method == "both") methods.push_back(Method::NewtonKaczmarz);
  if (a.method == "gn" || a.method == "both") methods.push_back(Method::GaussNewton);
  if (methods.empty()) fail(ErrorCode::InvalidArgument, "method must be nk, gn or both");

  std::vector<EnsembleResult> results;
  std::vector<CheckLine> checks;
  for (Method method : methods) {
    a.spec.method = method;
    EnsembleResult r = run_ensemble(a.spec);
    const std::string tag = method_name(method);
    write_ensemble_runs_csv(r, output_path(g, "ensemble_" + tag + "_runs.csv"));
    write_ensemble_summary_csv(r, output_path(g, "ensemble_" + tag + "_summary.csv"));
    for (const AlphaSummary& s : r.summary) {
      out << tag << " alpha=" << format_double(s.alpha);
      for (std::size_t t = 0; t < s.below.size(); ++t) {
        out << "  <" << format_double(100.0 * a.spec.thresholds[t]) << "%: " << s.below[t].mean << " +- "
            << s.below[t].stddev;
      }
      if (method == Method::GaussNewton) {
        out << "  converged: " << s.converged.mean << " +- " << s.converged.stddev
            << "  converged rmse%: " << s.converged_rmse.mean << " +- " << s.converged_rmse.stddev;
      }
      out << '\n';
    }
    const auto lines = check_ensemble(r);
    checks.insert(checks.end(), lines.begin(), lines.end());
    results.push_back(std::move(r));
  }
  if (results.size() == 2) {
    const auto lines = check_method_ordering(results[0], results[1]);
    checks.insert(checks.end(), lines.begin(), lines.end());
  }
  return g.check ? report_checks(checks, out) : kExitOk;
}

int cmd_convergence(const Global& g, ConvergenceSpec spec, std::ostream& out) {
  spec.base_seed = g.seed;
  spec.jobs = g.jobs;
  const ConvergenceResult r = run_convergence(spec);
  write_convergence_csv(r, output_path(g, "convergence.csv"));
  write_convergence_svg(r, output_path(g, "convergence.svg"));
  for (double mu : spec.mus) {
    out << "mu=" << format_double(mu) << " mean validation rmse after " << spec.passes << " passes: "
        << format_double(mean_rmse_at(r, mu, spec.passes)) << '\n';
  }
  return g.check ? report_checks(check_convergence(r), out) : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kolmogorov-Arnold, Urysohn and ridge model identification by row-action methods", "kaid"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "Base seed for data, initial guesses and shuffling");
  app.add_option("--out-dir", g.out_dir, "Directory for output files");
  app.add_option("--jobs", g.jobs, "Maximum concurrent runs")->check(CLI::PositiveNumber);
  app.add_flag("--check", g.check, "Compare results with the reference acceptance bands; exit 2 on violation");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a dataset (train.csv, val.csv)");
  gen_cmd->add_option("--kind", gen.kind, "ridge or formula2")->check(CLI::IsMember({"ridge", "formula2"}));
  gen_cmd->add_option("--records", gen.records, "Training records (ridge: 400, formula2: 10000)");
  gen_cmd->add_option("--val-records", gen.val_records, "Validation records (formula2: 2000)")
      ->each([&](const std::string&) { gen.val_set = true; });

  FitArgs fit;
  fit.config.epsilon = 1e-6;
  fit.config.patience = 20;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model (model.json, report.json, history.csv)");
  fit_cmd->add_option("--model", fit.model, "urysohn, ka, ridge-nk or ridge-gn")
      ->check(CLI::IsMember({"urysohn", "ka", "ridge-nk", "ridge-gn"}));
  fit_cmd->add_option("--train", fit.train, "Training CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--val", fit.val, "Validation CSV")->check(CLI::ExistingFile);
  fit_cmd->add_option("--mu", fit.config.mu, "Relaxation parameter in (0, 2)")->check(kRelaxation);
  fit_cmd->add_option("--passes", fit.config.passes, "Pass budget")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--epsilon", fit.config.epsilon, "Plateau threshold on per-pass RMSE change (0 disables)");
  fit_cmd->add_option("--patience", fit.config.patience, "Consecutive plateau passes before stopping");
  fit_cmd->add_flag("--shuffle", fit.config.shuffle, "Seeded per-pass shuffle of the record order");
  fit_cmd->add_option("--n", fit.n, "Inner (or Urysohn) basis size")->check(CLI::Range(2, 100000));
  fit_cmd->add_option("--s", fit.s, "Outer basis size")->check(CLI::Range(2, 100000));
  fit_cmd->add_option("--addends", fit.addends, "Number of addends K (default 2m+1)");
  fit_cmd->add_option("--x-min", fit.x_min, "Inner domain lower bound (default: data minimum)");
  fit_cmd->add_option("--x-max", fit.x_max, "Inner domain upper bound (default: data maximum)");
  fit_cmd->add_option("--alpha", fit.alpha, "Ridge: perturbation amplitude of the reference model");
  fit_cmd->add_option("--init", fit.init, "Ridge: initial model file")->check(CLI::ExistingFile);
  fit_cmd->add_option("--steps", fit.steps, "Ridge NK: single-record steps");
  fit_cmd->add_option("--delta", fit.gn.delta, "Ridge GN: step-size convergence tolerance");
  fit_cmd->add_option("--max-iters", fit.gn.max_iterations, "Ridge GN: iteration limit");
  fit_cmd->add_flag("--strict", fit.gn.require_small_gradient, "Ridge GN: also require |gradient| < delta");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model (predictions.csv, metrics.csv)");
  eval_cmd->add_option("--model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ev.data, "Dataset CSV")->required()->check(CLI::ExistingFile);

  EnsembleArgs ens;
  auto* ens_cmd = app.add_subcommand("ensemble", "Ridge identification study, NK vs GN");
  ens_cmd->add_option("--method", ens.method, "nk, gn or both")->check(CLI::IsMember({"nk", "gn", "both"}));
  ens_cmd->add_option("--alphas", ens.spec.alphas, "Perturbation amplitudes")->delimiter(',');
  ens_cmd->add_option("--runs", ens.spec.runs, "Runs per ensemble")->check(CLI::PositiveNumber);
  ens_cmd->add_option("--ensembles", ens.spec.ensembles, "Number of ensembles")->check(CLI::PositiveNumber);
  ens_cmd->add_option("--records", ens.spec.records, "Records per dataset")->check(CLI::PositiveNumber);
  ens_cmd->add_option("--nk-mu", ens.spec.nk_mu, "NK relaxation parameter")->check(kRelaxation);
  ens_cmd->add_option("--nk-steps", ens.spec.nk_steps, "NK single-record steps");
  ens_cmd->add_flag("--steps-as-passes", ens.spec.nk_steps_are_passes, "Count --nk-steps in full passes");
  ens_cmd->add_option("--gn-delta", ens.spec.gn.delta, "GN step-size tolerance");
  ens_cmd->add_option("--gn-max-iters", ens.spec.gn.max_iterations, "GN iteration limit");
  ens_cmd->add_flag("--gn-strict", ens.spec.gn.require_small_gradient, "GN: also require |gradient| < delta");

  ConvergenceSpec conv;
  auto* conv_cmd = app.add_subcommand("convergence", "Kolmogorov-Arnold RMSE-vs-passes study");
  conv_cmd->add_option("--mus", conv.mus, "Relaxation parameters")->delimiter(',')->check(kRelaxation);
  conv_cmd->add_option("--passes", conv.passes, "Passes per run")->check(CLI::PositiveNumber);
  conv_cmd->add_option("--seeds", conv.seeds, "Runs per mu")->check(CLI::PositiveNumber);
  conv_cmd->add_option("--train-records", conv.train_records, "Training records")->check(CLI::PositiveNumber);
  conv_cmd->add_option("--val-records", conv.validation_records, "Validation records")->check(CLI::PositiveNumber);
  conv_cmd->add_option("--n", conv.n, "Inner basis size")->check(CLI::Range(2, 100000));
  conv_cmd->add_option("--s", conv.s, "Outer basis size")->check(CLI::Range(2, 100000));

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gen_cmd) return cmd_gen(g, gen, out);
    if (*fit_cmd) return cmd_fit(g, fit, out);
    if (*eval_cmd) return cmd_eval(g, ev, out);
    if (*ens_cmd) return cmd_ensemble(g, ens, out);
    if (*conv_cmd) return cmd_convergence(g, conv, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace kaid::cli
