#include "kaid/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kaid/error.hpp"
#include "kaid/rng.hpp"

namespace kaid {

void Dataset::push_back(std::span<const double> x, double y) {
  if (dim_ == 0 && empty()) dim_ = x.size();
  if (x.size() != dim_) {
    std::ostringstream os;
    os << "record has " << x.size() << " inputs, dataset expects " << dim_;
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  inputs_.insert(inputs_.end(), x.begin(), x.end());
  outputs_.push_back(y);
  y_min_ = std::min(y_min_, y);
  y_max_ = std::max(y_max_, y);
}

void Dataset::reserve(std::size_t records) {
  inputs_.reserve(records * dim_);
  outputs_.reserve(records);
}

std::pair<double, double> Dataset::input_range() const noexcept {
  if (inputs_.empty()) return {0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(inputs_.begin(), inputs_.end());
  return {*lo, *hi};
}

void FitConfig::validate() const {
  require_relaxation(mu);
  if (passes < 1) fail(ErrorCode::InvalidArgument, "passes must be at least 1");
}

bool PlateauMonitor::update(double rmse) noexcept {
  if (epsilon_ > 0.0 && !std::isnan(last_) && std::abs(rmse - last_) < epsilon_) {
    ++flat_;
  } else {
    flat_ = 0;
  }
  last_ = rmse;
  return patience_ > 0 && flat_ >= patience_;
}

double rmse_normalized(std::span<const double> y, std::span<const double> yhat, double y_min,
                       double y_max) {
  if (y.size() != yhat.size()) {
    std::ostringstream os;
    os << "rmse over " << y.size() << " targets and " << yhat.size() << " predictions";
    fail(ErrorCode::LengthMismatch, os.str());
  }
  if (y.empty()) fail(ErrorCode::LengthMismatch, "rmse over zero records");
  if (!(y_max > y_min)) fail(ErrorCode::ZeroRange, "rmse normalization needs y_max > y_min");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(y.size())) / (y_max - y_min);
}

PassOrder::PassOrder(std::size_t records, const FitConfig& config)
    : order_(records), shuffle_(config.shuffle), seed_(config.seed) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

const std::vector<std::size_t>& PassOrder::next() {
  if (shuffle_) {
    Rng rng(seed_ ^ splitmix64(pass_), Stream::Shuffle);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::swap(order_[i - 1], order_[rng.below(i)]);
    }
  }
  ++pass_;
  return order_;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, bool& ok) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  ok = !text.empty() && res.ec == std::errc() && res.ptr == text.data() + text.size();
  return v;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const RecordView rec = data[i];
    for (double v : rec.x) out << format_double(v) << ',';
    out << format_double(rec.y) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || trimmed(line).empty()) {
    fail(ErrorCode::EmptyDataset, path.string() + " is empty");
  }
  const auto header = split_commas(line);
  const std::size_t dim = header.size() - 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (trimmed(header[j]) != "x" + std::to_string(j + 1)) {
      fail(ErrorCode::MissingColumn, path.string() + ": header column " + std::to_string(j + 1) +
                                         " should be x" + std::to_string(j + 1));
    }
  }
  if (dim == 0 || trimmed(header.back()) != "y") {
    fail(ErrorCode::MissingColumn, path.string() + ": header must end with column y");
  }

  Dataset data(dim);
  std::vector<double> x(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != dim + 1) {
      fail(ErrorCode::MalformedRow, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(dim + 1) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    bool ok = true;
    for (std::size_t j = 0; j <= dim && ok; ++j) {
      const double v = parse_double(fields[j], ok);
      if (ok && !std::isfinite(v)) ok = false;
      if (j < dim) x[j] = v; else if (ok) data.push_back(x, v);
    }
    if (!ok) {
      fail(ErrorCode::MalformedRow,
           path.string() + ":" + std::to_string(line_no) + ": non-numeric or non-finite field");
    }
  }
  if (data.empty()) fail(ErrorCode::EmptyDataset, path.string() + " has no records");
  return data;
}

}  // namespace kaid
