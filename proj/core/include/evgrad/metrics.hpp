#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evgrad {

// One CSV row. Optional fields are written as empty cells when absent.
struct MetricsRecord {
  std::uint64_t run_seed = 0;
  std::uint64_t epoch = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  std::optional<double> a2c_loss;
  std::optional<double> evm_loss;
  std::optional<double> evv_loss;
  // probe epochs only
  std::optional<double> grad_var_biased;
  std::optional<double> grad_var_unbiased;
  std::optional<double> grad_var_no_baseline;
  std::optional<double> reduction_ratio;
  std::optional<double> c_hat_l;
  std::optional<double> c_hat_r;
  std::optional<std::int64_t> wall_ms;

  bool operator==(const MetricsRecord&) const = default;
};

inline constexpr const char* metrics_schema_line = "# evgrad-metrics v1";

// Column names in file order.
const std::vector<std::string>& metrics_columns();

class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void append(const MetricsRecord& record) = 0;
};

// Collects records in memory.
class MemorySink : public MetricsSink {
 public:
  void append(const MetricsRecord& record) override { records.push_back(record); }
  std::vector<MetricsRecord> records;
};

// Writes the schema line and header on construction, one row per append.
// Reals use 17 significant digits so they parse back to the same double.
class CsvMetricsWriter : public MetricsSink {
 public:
  explicit CsvMetricsWriter(std::ostream& out);
  void append(const MetricsRecord& record) override;

 private:
  std::ostream& out_;
};

std::string format_real(double v);

// Parses a file produced by CsvMetricsWriter. Throws ParseError on schema mismatch.
std::vector<MetricsRecord> read_metrics_csv(std::istream& in);

}  // namespace evgrad
