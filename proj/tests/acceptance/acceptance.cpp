// Acceptance harness: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "kaid/experiments.hpp"
#include "kaid/serialization.hpp"
#include "properties.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  int id;
  std::string title;
  bool pass = true;
  std::vector<std::string> details;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void absorb(Criterion& c, const std::vector<kaid::CheckLine>& lines) {
  for (const auto& l : lines) {
    c.details.push_back(std::string(l.pass ? "ok   " : "MISS ") + l.name + ": " + l.detail);
    c.pass = c.pass && l.pass;
  }
}

kaid::EnsembleResult ensemble(kaid::Method method, double& per_alpha_seconds) {
  kaid::EnsembleSpec spec;
  spec.alphas = {0.4, 1.2, 2.8};
  spec.method = method;
  const auto start = Clock::now();
  kaid::EnsembleResult r = kaid::run_ensemble(spec);
  // One "ensemble" in the runtime target is 100 runs at one alpha.
  per_alpha_seconds = seconds_since(start) / static_cast<double>(spec.alphas.size() * spec.ensembles);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int cli(const fs::path& dir, std::vector<std::string> args) {
  args.insert(args.begin(), {"kaid", "--seed", "11", "--out-dir", dir.string()});
  std::ostringstream out, err;
  return kaid::cli::run(args, out, err);
}

/// Runs every subcommand into `dir`; returns false if any command errors.
bool run_pipeline(const fs::path& dir) {
  const std::string train = (dir / "train.csv").string();
  const std::string val = (dir / "val.csv").string();
  const fs::path ridge = dir / "ridge";
  bool ok = true;
  ok &= cli(dir, {"gen", "--kind", "formula2", "--records", "2000", "--val-records", "400"}) == 0;
  ok &= cli(dir / "ka", {"fit", "--model", "ka", "--train", train, "--val", val, "--passes", "15", "--shuffle"}) == 0;
  ok &= cli(dir / "ka", {"eval", "--model", (dir / "ka" / "model.json").string(), "--data", val}) == 0;
  ok &= cli(dir / "ury", {"fit", "--model", "urysohn", "--train", train, "--passes", "15"}) == 0;
  ok &= cli(ridge, {"gen", "--kind", "ridge", "--records", "400", "--val-records", "100"}) == 0;
  const std::string rtrain = (ridge / "train.csv").string();
  ok &= cli(ridge / "nk", {"fit", "--model", "ridge-nk", "--train", rtrain, "--alpha", "1.2", "--mu", "0.1"}) == 0;
  ok &= cli(ridge / "gn", {"fit", "--model", "ridge-gn", "--train", rtrain, "--alpha", "1.2"}) == 0;
  ok &= cli(dir / "ens", {"--jobs", "2", "ensemble", "--alphas", "0.4,2.8", "--runs", "6", "--ensembles", "2"}) == 0;
  ok &= cli(dir / "conv", {"--jobs", "2", "convergence", "--seeds", "2", "--passes", "4", "--train-records",
                           "500", "--val-records", "100"}) == 0;
  return ok;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria;
  std::cout << "running ridge ensembles (NK then GN, 5 x 100 runs per alpha)..." << std::endl;

  double nk_seconds = 0.0, gn_seconds = 0.0;
  const kaid::EnsembleResult nk = ensemble(kaid::Method::NewtonKaczmarz, nk_seconds);
  const kaid::EnsembleResult gn = ensemble(kaid::Method::GaussNewton, gn_seconds);

  Criterion c1{1, "ridge NK bands at alpha 0.4, 1.2, 2.8"};
  absorb(c1, kaid::check_ensemble(nk));
  c1.details.push_back(fmt("runtime per 100-run ensemble %.2f s (target <= 120 s)", nk_seconds));
  c1.pass = c1.pass && nk_seconds <= 120.0;
  criteria.push_back(c1);

  Criterion c2{2, "ridge GN bands incl. converged share and converged-run RMSE"};
  absorb(c2, kaid::check_ensemble(gn));
  criteria.push_back(c2);

  Criterion c3{3, "NK count exceeds GN count at the 10% threshold"};
  absorb(c3, kaid::check_method_ordering(nk, gn));
  criteria.push_back(c3);

  std::cout << "running convergence study (mu 1, 0.3, 0.1; 10 runs; 500 passes)..." << std::endl;
  kaid::ConvergenceSpec conv_spec;
  const auto conv_start = Clock::now();
  const kaid::ConvergenceResult conv = kaid::run_convergence(conv_spec);
  const double run_seconds =
      seconds_since(conv_start) / static_cast<double>(conv_spec.mus.size() * conv_spec.seeds);
  const auto conv_lines = kaid::check_convergence(conv);

  Criterion c4{4, "KA on the five-input function reaches validation RMSE <= 1% (mu 1, 500 passes)"};
  Criterion c5{5, "log-log RMSE vs passes linear for mu 1, R^2 >= 0.9 over passes 10-500"};
  Criterion c6{6, "RMSE(mu 0.1) > RMSE(mu 0.3) > RMSE(mu 1) at pass 500"};
  for (const auto& l : conv_lines) {
    Criterion* target = &c4;
    if (l.name.find("R^2") != std::string::npos) target = &c5;
    if (l.name.find("smaller mu") != std::string::npos) target = &c6;
    absorb(*target, {l});
  }
  double worst_run = 0.0;
  for (const auto& r : conv.runs) {
    if (r.mu == 1.0) worst_run = std::max(worst_run, r.rmse.back());
  }
  c4.details.push_back(fmt("worst single mu=1 run %.5f", worst_run));
  c4.details.push_back(fmt("runtime per fit %.1f s (target <= 300 s)", run_seconds));
  c4.pass = c4.pass && run_seconds <= 300.0;
  criteria.push_back(c4);
  criteria.push_back(c5);
  criteria.push_back(c6);

  std::cout << "running property suite..." << std::endl;
  Criterion c7{7, "property suite"};
  const auto prop_start = Clock::now();
  for (const auto& o : kaid::props::full_suite(2024)) {
    std::ostringstream os;
    os << (o.pass() ? "ok   " : "MISS ") << o.name << ": worst " << o.worst << " (limit " << o.limit
       << ", " << o.samples << " samples)";
    c7.details.push_back(os.str());
    c7.pass = c7.pass && o.pass();
  }
  const double prop_seconds = seconds_since(prop_start);
  c7.details.push_back(fmt("runtime %.1f s (target <= 60 s)", prop_seconds));
  c7.pass = c7.pass && prop_seconds <= 60.0;
  criteria.push_back(c7);

  std::cout << "running every CLI command twice..." << std::endl;
  Criterion c8{8, "identical invocations give byte-identical artifacts"};
  const fs::path root = fs::temp_directory_path() / "kaid_acceptance_determinism";
  fs::remove_all(root);
  const bool ran = run_pipeline(root / "a") && run_pipeline(root / "b");
  if (!ran) {
    c8.pass = false;
    c8.details.push_back("MISS a CLI command returned an error");
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    if (slurp(entry.path()) != slurp(root / "b" / rel)) {
      c8.pass = false;
      c8.details.push_back("MISS differs: " + rel.string());
    }
    ++compared;
  }
  c8.details.push_back(std::to_string(compared) + " files compared");
  c8.pass = c8.pass && compared > 0;
  fs::remove_all(root);
  criteria.push_back(c8);

  std::cout << '\n';
  int failed = 0;
  for (const Criterion& c : criteria) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << '\n';
    for (const auto& d : c.details) std::cout << "        " << d << '\n';
    failed += c.pass ? 0 : 1;
  }
  std::cout << '\n' << criteria.size() - failed << " of " << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
