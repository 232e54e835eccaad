#include "evgrad/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "evgrad/checks.hpp"
#include "evgrad/config.hpp"
#include "evgrad/errors.hpp"
#include "evgrad/metrics.hpp"

namespace evgrad {

namespace {

constexpr const char* params_schema_line = "# evgrad-params v1";

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path.string());
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path.string());
  return in;
}

void write_vector(std::ostream& out, std::string_view key, const ParamVector& v) {
  out << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_real(v[i]);
  out << '\n';
}

ParamVector read_vector(std::istringstream& fields, int line) {
  std::size_t n = 0;
  if (!(fields >> n)) throw ParseError(line, "missing vector length");
  ParamVector v(static_cast<Eigen::Index>(n));
  std::string token;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(fields >> token)) throw ParseError(line, "expected " + std::to_string(n) + " values");
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v[i]);
    if (ec != std::errc{} || ptr != token.data() + token.size()) throw ParseError(line, "bad number '" + token + "'");
  }
  if (fields >> token) throw ParseError(line, "trailing values");
  return v;
}

int cmd_train(const std::optional<std::string>& config_path, const std::string& seeds, const std::string& out_dir,
              std::optional<std::size_t> epochs, const std::optional<std::string>& criterion, std::ostream& out) {
  TrainConfig cfg = config_path ? load_config(*config_path) : TrainConfig{};
  if (epochs) cfg.epochs = *epochs;
  if (criterion) cfg.criterion = parse_criterion(*criterion);
  cfg.validate();
  const SeedRange range = parse_seed_range(seeds);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream echo = open_output(dir / "config.echo");
    echo << format_config(cfg);
  }
  for (std::uint64_t seed = range.first;; ++seed) {
    cfg.seed = seed;
    std::ofstream csv = open_output(dir / ("metrics_" + std::to_string(seed) + ".csv"));
    CsvMetricsWriter writer(csv);
    const TrainState final_state = run_experiment(cfg, writer);
    std::ofstream params = open_output(dir / ("params_" + std::to_string(seed) + ".txt"));
    write_params(params, final_state);
    out << "seed " << seed << ": " << cfg.epochs << " epochs written to " << (dir / "").string() << '\n';
    if (seed == range.last) break;
  }
  return 0;
}

int cmd_probe(const std::optional<std::string>& config_path, const std::string& params_path, std::ostream& out) {
  const TrainConfig cfg = config_path ? load_config(*config_path) : TrainConfig{};
  std::ifstream in = open_input(params_path);
  const TrainState state = read_params(in);
  if (static_cast<std::size_t>(state.theta.size()) != cfg.policy.param_count() ||
      static_cast<std::size_t>(state.phi.size()) != cfg.baseline.param_count())
    throw ShapeError("saved parameters do not match the configured network shapes");
  const VarianceReport r = probe_state(state, cfg);
  out << "pool_size " << r.pool_size << '\n'
      << "grad_var_biased " << format_real(r.v_evv) << '\n'
      << "grad_var_unbiased " << format_real(r.v_unbiased) << '\n'
      << "grad_var_mean_sq " << format_real(r.v_mean_sq) << '\n'
      << "grad_var_no_baseline " << format_real(r.baseline_off_variance) << '\n'
      << "reduction_ratio " << format_real(r.reduction_ratio) << (r.degenerate_pool ? " (degenerate pool)" : "") << '\n'
      << "c_hat_l " << format_real(r.c_hat_l) << '\n'
      << "c_hat_r " << format_real(r.c_hat_r) << '\n';
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t instances, std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_gradcheck(seed, instances)) {
    const bool pass = r.max_relative_error < gradcheck_tolerance;
    ok = ok && pass;
    out << (pass ? "ok   " : "FAIL ") << r.name << ": " << r.instances
        << " instances, max relative error " << r.max_relative_error << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_oracle(std::uint64_t seed, std::size_t pairs, std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_oracle_checks(seed, pairs)) {
    ok = ok && r.passed();
    out << (r.passed() ? "ok   " : "FAIL ") << r.name << ": max abs error " << r.max_abs_error << " (tolerance "
        << r.tolerance << ")\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

SeedRange parse_seed_range(std::string_view text) {
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    const auto s = parse_u64(text, "seed");
    return {s, s};
  }
  const SeedRange r{parse_u64(text.substr(0, dots), "seed"), parse_u64(text.substr(dots + 2), "seed")};
  if (r.last < r.first) throw ConfigError("seed range '" + std::string(text) + "' is empty");
  return r;
}

void write_params(std::ostream& out, const TrainState& state) {
  out << params_schema_line << '\n' << "seed " << state.seed << '\n' << "epoch " << state.epoch << '\n';
  write_vector(out, "theta", state.theta);
  write_vector(out, "phi", state.phi);
  if (!out) throw ResourceError("failed writing parameters");
}

TrainState read_params(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != params_schema_line) throw ParseError(1, "expected '# evgrad-params v1'");
  TrainState state;
  bool seen_theta = false, seen_phi = false;
  for (int n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "seed") {
      if (!(fields >> state.seed)) throw ParseError(n, "bad seed");
    } else if (key == "epoch") {
      if (!(fields >> state.epoch)) throw ParseError(n, "bad epoch");
    } else if (key == "theta") {
      state.theta = read_vector(fields, n);
      seen_theta = true;
    } else if (key == "phi") {
      state.phi = read_vector(fields, n);
      seen_phi = true;
    } else {
      throw ParseError(n, "unknown key '" + key + "'");
    }
  }
  if (!seen_theta || !seen_phi) throw ParseError(0, "parameter file needs theta and phi lines");
  return state;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Policy-gradient training with learned baselines and gradient-variance probes", "evgrad"};
  app.require_subcommand(1);

  std::optional<std::string> config;
  std::string seeds = "0";
  std::string out_dir = "out";
  std::optional<std::size_t> epochs;
  std::optional<std::string> criterion;
  auto* train = app.add_subcommand("train", "Run one experiment per seed and write metrics CSVs");
  train->add_option("--config", config, "Experiment config file")->check(CLI::ExistingFile);
  train->add_option("--seeds", seeds, "Seed or inclusive range a..b")->capture_default_str();
  train->add_option("--out", out_dir, "Output directory")->capture_default_str();
  train->add_option("--epochs", epochs, "Override the configured epoch count");
  train->add_option("--criterion", criterion, "Override the baseline criterion (none, a2c, evm, evv)");

  std::string params;
  auto* probe = app.add_subcommand("probe", "Measure gradient variance for saved parameters");
  probe->add_option("--config", config, "Experiment config file")->check(CLI::ExistingFile);
  probe->add_option("--params", params, "Parameter file written by train")->required()->check(CLI::ExistingFile);

  std::uint64_t check_seed = 0;
  std::size_t instances = 100;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gradcheck->add_option("--seed", check_seed, "Instance generator seed")->capture_default_str();
  gradcheck->add_option("--instances", instances, "Random instances per gradient family")->capture_default_str();

  std::size_t pairs = 50;
  auto* oracle = app.add_subcommand("oracle", "Exact enumeration checks on small chain MDPs");
  oracle->add_option("--seed", check_seed, "Instance generator seed")->capture_default_str();
  oracle->add_option("--pairs", pairs, "Random (policy, baseline) pairs")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (train->parsed()) return cmd_train(config, seeds, out_dir, epochs, criterion, out);
    if (probe->parsed()) return cmd_probe(config, params, out);
    if (gradcheck->parsed()) return cmd_gradcheck(check_seed, instances, out);
    if (oracle->parsed()) return cmd_oracle(check_seed, pairs, out);
  } catch (const TrainingAbort& e) {
    err << "training aborted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace evgrad
