#include "kaid/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kaid/error.hpp"

namespace kaid {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

json header(const char* kind) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) fail(ErrorCode::SchemaMismatch, std::string("model file lacks field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaMismatch, std::string("field '") + name + "': " + e.what());
  }
}

std::vector<double> range_pair(const json& j, const char* name) {
  auto v = field<std::vector<double>>(j, name);
  if (v.size() != 2) fail(ErrorCode::SchemaMismatch, std::string("field '") + name + "' must hold [lo, hi]");
  return v;
}

}  // namespace

std::string to_json(const UrysohnModel& model) {
  json j = header("urysohn");
  j["m"] = model.m();
  j["n"] = model.n();
  j["lo"] = model.basis().lo();
  j["hi"] = model.basis().hi();
  j["U"] = std::vector<double>(model.params().begin(), model.params().end());
  return j.dump(2) + "\n";
}

std::string to_json(const KaModel& model) {
  json j = header("kolmogorov_arnold");
  j["m"] = model.m();
  j["K"] = model.addends();
  j["n"] = model.n();
  j["s"] = model.s();
  j["x_range"] = {model.inner().lo(), model.inner().hi()};
  j["t_range"] = {model.outer().lo(), model.outer().hi()};
  j["H"] = std::vector<double>(model.h().begin(), model.h().end());
  j["G"] = std::vector<double>(model.g().begin(), model.g().end());
  return j.dump(2) + "\n";
}

std::string to_json(const RidgeModel& model) {
  json j = header("ridge");
  j["m"] = model.m();
  j["s"] = model.s();
  j["centers"] = model.outer().centers();
  j["c"] = std::vector<double>(model.c().begin(), model.c().end());
  j["G"] = std::vector<double>(model.g().begin(), model.g().end());
  return j.dump(2) + "\n";
}

std::string to_json(const RunReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "run_report";
  j["rng"] = report.rng;
  j["passes_run"] = report.rmse_history.size();
  j["final_rmse"] = report.rmse_history.empty() ? json(nullptr) : json(report.rmse_history.back());
  j["rmse_history"] = report.rmse_history;
  j["skipped_steps"] = report.skipped_steps;
  j["failed"] = report.failed;
  j["failure"] = report.failure;
  j["stopped_early"] = report.stopped_early;
  j["parameter_norm"] = report.parameter_norm;
  return j.dump(2) + "\n";
}

AnyModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaMismatch, std::string("model file is not valid JSON: ") + e.what());
  }
  const int version = field<int>(j, "schema_version");
  if (version != kSchemaVersion) {
    std::ostringstream os;
    os << "model schema version " << version << " is not supported (expected " << kSchemaVersion << ")";
    fail(ErrorCode::SchemaMismatch, os.str());
  }
  const auto kind = field<std::string>(j, "kind");
  if (kind == "urysohn") {
    const auto m = field<std::size_t>(j, "m");
    const auto n = field<std::size_t>(j, "n");
    return UrysohnModel(m, PwlBasis(field<double>(j, "lo"), field<double>(j, "hi"), n),
                        field<std::vector<double>>(j, "U"));
  }
  if (kind == "kolmogorov_arnold") {
    const auto m = field<std::size_t>(j, "m");
    const auto k = field<std::size_t>(j, "K");
    const auto n = field<std::size_t>(j, "n");
    const auto s = field<std::size_t>(j, "s");
    const auto xr = range_pair(j, "x_range");
    const auto tr = range_pair(j, "t_range");
    return KaModel(m, k, PwlBasis(xr[0], xr[1], n), PwlBasis(tr[0], tr[1], s),
                   field<std::vector<double>>(j, "H"), field<std::vector<double>>(j, "G"));
  }
  if (kind == "ridge") {
    auto c = field<std::vector<double>>(j, "c");
    if (c.size() != field<std::size_t>(j, "m")) fail(ErrorCode::SchemaMismatch, "ridge 'c' length differs from m");
    return RidgeModel(std::move(c), field<std::vector<double>>(j, "G"),
                      GaussBasis(field<std::vector<double>>(j, "centers")));
  }
  fail(ErrorCode::SchemaMismatch, "unknown model kind '" + kind + "'");
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  write_text(path, std::visit([](const auto& mdl) { return to_json(mdl); }, model));
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

void save_history_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "pass,rmse\n";
  for (std::size_t p = 0; p < report.rmse_history.size(); ++p) {
    os << (p + 1) << ',' << format_double(report.rmse_history[p]) << '\n';
  }
  write_text(path, os.str());
}

void save_report(const RunReport& report, const std::filesystem::path& path) {
  write_text(path, to_json(report));
}

double eval_model(const AnyModel& model, std::span<const double> x) {
  return std::visit([&](const auto& mdl) { return mdl.eval(x); }, model);
}

std::size_t model_inputs(const AnyModel& model) {
  return std::visit([](const auto& mdl) { return mdl.m(); }, model);
}

}  // namespace kaid
