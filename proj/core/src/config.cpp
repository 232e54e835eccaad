#include "evgrad/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <tuple>

#include "evgrad/errors.hpp"

namespace evgrad {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct Entry {
  std::string value;
  int line;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "env.name",           "env.horizon",         "env.states",          "env.actions",
      "env.rewards",        "env.transitions",     "env.terminal",        "policy.layers",
      "policy.activation",  "policy.seed",         "baseline.layers",     "baseline.activation",
      "baseline.seed",      "training.criterion",  "training.batch_size", "training.gamma",
      "training.epochs",    "training.alpha",      "training.alpha_decay", "training.alpha_half_life",
      "training.beta",      "training.beta_decay", "training.beta_half_life", "training.update",
      "training.probe_every", "training.probe_pool", "training.seed",     "training.record_wall_time"};
  return keys;
}

double to_real(const Entry& e) {
  double v = 0.0;
  const char* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(e.line, "expected a real number, got '" + e.value + "'");
  return v;
}

std::uint64_t to_uint(const Entry& e) {
  std::uint64_t v = 0;
  const char* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(e.line, "expected a non-negative integer, got '" + e.value + "'");
  return v;
}

bool to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ParseError(e.line, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::string spaced = value;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<std::string> items;
  for (std::string item; in >> item;) items.push_back(item);
  return items;
}

std::vector<double> to_reals(const Entry& e) {
  std::vector<double> out;
  for (const auto& item : split_list(e.value)) out.push_back(to_real({item, e.line}));
  return out;
}

std::vector<std::size_t> to_sizes(const Entry& e) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(e.value)) out.push_back(to_uint({item, e.line}));
  return out;
}

// Wraps config-level exceptions thrown while interpreting a value with its line.
template <typename Fn>
auto at_line(int line, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& err) {
    throw ParseError(line, err.what());
  }
}

// Shortest text that parses back to the same double.
std::string shortest_real(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + shortest_real(v[i]);
  return s;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

TrainConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "env" && section != "policy" && section != "baseline" && section != "training")
        throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    const std::string full = key.find('.') == std::string::npos && !section.empty() ? section + "." + key : key;
    if (std::find(known_keys().begin(), known_keys().end(), full) == known_keys().end())
      throw ParseError(line_no, "unknown key '" + full + "'");
    if (entries.contains(full)) throw ParseError(line_no, "duplicate key '" + full + "'");
    entries[full] = {value, line_no};
  }

  auto get = [&](const std::string& key) -> const Entry* {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  TrainConfig cfg;
  if (auto e = get("env.name")) cfg.env.kind = at_line(e->line, [&] { return parse_env_kind(e->value); });
  if (cfg.env.kind == EnvKind::chain) {
    cfg.env = make_test_chain();
    ChainSpec& chain = *cfg.env.chain;
    const bool custom = get("env.states") || get("env.actions") || get("env.rewards") || get("env.transitions");
    if (custom) {
      for (const char* k : {"env.states", "env.actions", "env.rewards", "env.transitions"})
        if (!get(k)) throw ParseError(line_no, std::string("custom chain needs ") + k);
      chain.num_states = to_uint(*get("env.states"));
      chain.num_actions = to_uint(*get("env.actions"));
      chain.rewards = to_reals(*get("env.rewards"));
      chain.transitions = to_reals(*get("env.transitions"));
      chain.terminal.assign(chain.num_states, false);
    }
    if (auto e = get("env.terminal")) {
      chain.terminal.assign(chain.num_states, false);
      for (auto s : to_sizes(*e)) {
        if (s >= chain.num_states) throw ParseError(e->line, "terminal state index out of range");
        chain.terminal[s] = true;
      }
    }
  } else {
    for (const char* k : {"env.states", "env.actions", "env.rewards", "env.transitions", "env.terminal"})
      if (auto e = get(k)) throw ParseError(e->line, std::string(k) + " only applies to chain environments");
  }
  if (auto e = get("env.horizon")) cfg.env.horizon_cap = to_uint(*e);
  if (auto e = get("env.name")) at_line(e->line, [&] { cfg.env.validate(); return 0; });

  // Network sizes follow the environment unless given explicitly.
  cfg.policy.layer_sizes.front() = cfg.env.observation_dim();
  cfg.policy.layer_sizes.back() = cfg.env.action_count();
  cfg.baseline.layer_sizes.front() = cfg.env.observation_dim();
  for (const char* net : {"policy", "baseline"}) {
    MlpShape& shape = std::string(net) == "policy" ? cfg.policy : cfg.baseline;
    const std::string prefix = net;
    if (auto e = get(prefix + ".layers")) shape.layer_sizes = to_sizes(*e);
    if (auto e = get(prefix + ".activation"))
      shape.activation = at_line(e->line, [&] { return parse_activation(e->value); });
    if (auto e = get(prefix + ".seed")) (prefix == "policy" ? cfg.policy_seed : cfg.baseline_seed) = to_uint(*e);
  }

  if (auto e = get("training.criterion")) cfg.criterion = at_line(e->line, [&] { return parse_criterion(e->value); });
  if (auto e = get("training.batch_size")) cfg.batch_size = to_uint(*e);
  if (auto e = get("training.gamma")) cfg.gamma = to_real(*e);
  if (auto e = get("training.epochs")) cfg.epochs = to_uint(*e);
  if (auto e = get("training.alpha")) cfg.alpha.initial = to_real(*e);
  if (auto e = get("training.alpha_decay"))
    cfg.alpha.decay = at_line(e->line, [&] { return parse_step_decay(e->value); });
  if (auto e = get("training.alpha_half_life")) cfg.alpha.half_life = to_real(*e);
  if (auto e = get("training.beta")) cfg.beta.initial = to_real(*e);
  if (auto e = get("training.beta_decay"))
    cfg.beta.decay = at_line(e->line, [&] { return parse_step_decay(e->value); });
  if (auto e = get("training.beta_half_life")) cfg.beta.half_life = to_real(*e);
  if (auto e = get("training.update")) cfg.update = at_line(e->line, [&] { return parse_update_rule(e->value); });
  if (auto e = get("training.probe_every")) cfg.probe_every = to_uint(*e);
  if (auto e = get("training.probe_pool")) cfg.probe_pool = to_uint(*e);
  if (auto e = get("training.seed")) cfg.seed = to_uint(*e);
  if (auto e = get("training.record_wall_time")) cfg.record_wall_time = to_bool(*e);

  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory),
                                   "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "# evgrad effective config\n";
  out << "[env]\n";
  out << "name = " << to_string(cfg.env.kind) << "\n";
  out << "horizon = " << cfg.env.horizon_cap << "\n";
  if (cfg.env.kind == EnvKind::chain) {
    const ChainSpec& c = *cfg.env.chain;
    out << "states = " << c.num_states << "\n";
    out << "actions = " << c.num_actions << "\n";
    out << "rewards = " << join_reals(c.rewards) << "\n";
    out << "transitions = " << join_reals(c.transitions) << "\n";
    std::vector<std::size_t> terminal;
    for (std::size_t s = 0; s < c.num_states; ++s)
      if (c.terminal[s]) terminal.push_back(s);
    out << "terminal = " << join_sizes(terminal) << "\n";
  }
  for (const auto& [name, shape, seed] : {std::tuple{"policy", cfg.policy, cfg.policy_seed},
                                          std::tuple{"baseline", cfg.baseline, cfg.baseline_seed}}) {
    out << "\n[" << name << "]\n";
    out << "layers = " << join_sizes(shape.layer_sizes) << "\n";
    out << "activation = " << to_string(shape.activation) << "\n";
    out << "seed = " << seed << "\n";
  }
  out << "\n[training]\n";
  out << "criterion = " << to_string(cfg.criterion) << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "gamma = " << shortest_real(cfg.gamma) << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "alpha = " << shortest_real(cfg.alpha.initial) << "\n";
  out << "alpha_decay = " << to_string(cfg.alpha.decay) << "\n";
  out << "alpha_half_life = " << shortest_real(cfg.alpha.half_life) << "\n";
  out << "beta = " << shortest_real(cfg.beta.initial) << "\n";
  out << "beta_decay = " << to_string(cfg.beta.decay) << "\n";
  out << "beta_half_life = " << shortest_real(cfg.beta.half_life) << "\n";
  out << "update = " << to_string(cfg.update) << "\n";
  out << "probe_every = " << cfg.probe_every << "\n";
  out << "probe_pool = " << cfg.probe_pool << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "record_wall_time = " << (cfg.record_wall_time ? "true" : "false") << "\n";
  return out.str();
}

bool same_config(const TrainConfig& a, const TrainConfig& b) { return format_config(a) == format_config(b); }

}  // namespace evgrad
