#include "evgrad/metrics.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "evgrad/errors.hpp"

namespace evgrad {

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> columns = {
      "run_seed",          "epoch",           "mean_reward",   "std_reward",          "a2c_loss",
      "evm_loss",          "evv_loss",        "grad_var_biased", "grad_var_unbiased", "grad_var_no_baseline",
      "reduction_ratio",   "c_hat_l",         "c_hat_r",       "wall_ms"};
  return columns;
}

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, end);
}

namespace {

void put(std::ostream& out, const std::optional<double>& v) {
  if (v) out << format_real(*v);
}

void check(std::ostream& out) {
  if (!out) throw std::system_error(std::make_error_code(std::errc::io_error), "failed to write metrics");
}

}  // namespace

CsvMetricsWriter::CsvMetricsWriter(std::ostream& out) : out_(out) {
  out_ << metrics_schema_line << '\n';
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n';
  out_.flush();
  check(out_);
}

void CsvMetricsWriter::append(const MetricsRecord& r) {
  out_ << r.run_seed << ',' << r.epoch << ',' << format_real(r.mean_reward) << ',' << format_real(r.std_reward) << ',';
  put(out_, r.a2c_loss);
  out_ << ',';
  put(out_, r.evm_loss);
  out_ << ',';
  put(out_, r.evv_loss);
  out_ << ',';
  put(out_, r.grad_var_biased);
  out_ << ',';
  put(out_, r.grad_var_unbiased);
  out_ << ',';
  put(out_, r.grad_var_no_baseline);
  out_ << ',';
  put(out_, r.reduction_ratio);
  out_ << ',';
  put(out_, r.c_hat_l);
  out_ << ',';
  put(out_, r.c_hat_r);
  out_ << ',';
  if (r.wall_ms) out_ << *r.wall_ms;
  out_ << '\n';
  out_.flush();
  check(out_);
}

namespace {

template <typename T>
T parse_number(const std::string& cell, int line) {
  T v{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) throw ParseError(line, "bad number '" + cell + "'");
  return v;
}

template <typename T>
std::optional<T> parse_optional(const std::string& cell, int line) {
  if (cell.empty()) return std::nullopt;
  return parse_number<T>(cell, line);
}

}  // namespace

std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
  std::string text;
  int line = 0;
  if (!std::getline(in, text) || text != metrics_schema_line) throw ParseError(1, "missing schema line");
  ++line;
  std::string header;
  for (std::size_t i = 0; i < metrics_columns().size(); ++i) header += (i ? "," : "") + metrics_columns()[i];
  if (!std::getline(in, text) || text != header) throw ParseError(2, "unexpected column header");
  ++line;

  std::vector<MetricsRecord> records;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!text.empty() && text.back() == ',') cells.emplace_back();
    if (cells.size() != metrics_columns().size()) throw ParseError(line, "wrong number of columns");
    MetricsRecord r;
    r.run_seed = parse_number<std::uint64_t>(cells[0], line);
    r.epoch = parse_number<std::uint64_t>(cells[1], line);
    r.mean_reward = parse_number<double>(cells[2], line);
    r.std_reward = parse_number<double>(cells[3], line);
    r.a2c_loss = parse_optional<double>(cells[4], line);
    r.evm_loss = parse_optional<double>(cells[5], line);
    r.evv_loss = parse_optional<double>(cells[6], line);
    r.grad_var_biased = parse_optional<double>(cells[7], line);
    r.grad_var_unbiased = parse_optional<double>(cells[8], line);
    r.grad_var_no_baseline = parse_optional<double>(cells[9], line);
    r.reduction_ratio = parse_optional<double>(cells[10], line);
    r.c_hat_l = parse_optional<double>(cells[11], line);
    r.c_hat_r = parse_optional<double>(cells[12], line);
    r.wall_ms = parse_optional<std::int64_t>(cells[13], line);
    records.push_back(r);
  }
  return records;
}

}  // namespace evgrad
