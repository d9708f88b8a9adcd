#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "kaid/data.hpp"
#include "kaid/kolmogorov_arnold.hpp"
#include "kaid/ridge.hpp"
#include "kaid/urysohn.hpp"

namespace kaid {

inline constexpr int kSchemaVersion = 1;

using AnyModel = std::variant<UrysohnModel, KaModel, RidgeModel>;

std::string to_json(const UrysohnModel& model);
std::string to_json(const KaModel& model);
std::string to_json(const RidgeModel& model);
std::string to_json(const RunReport& report);

AnyModel model_from_json(const std::string& text);

void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

/// Writes the per-pass history as CSV with header `pass,rmse`.
void save_history_csv(const RunReport& report, const std::filesystem::path& path);
void save_report(const RunReport& report, const std::filesystem::path& path);

double eval_model(const AnyModel& model, std::span<const double> x);
std::size_t model_inputs(const AnyModel& model);

}  // namespace kaid
