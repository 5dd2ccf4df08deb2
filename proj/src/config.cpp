#include "prefopt/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "prefopt/errors.hpp"

namespace prefopt {

std::string_view to_string(GasRewardMode m) {
  return m == GasRewardMode::raw ? "raw" : "relative_clipped";
}

std::string_view to_string(RankMode m) {
  return m == RankMode::literal ? "literal" : "stochastic";
}

std::string_view to_string(SecureCounting m) {
  return m == SecureCounting::compiled_only ? "compiled_only" : "all_samples";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (true) {
    auto comma = text.find(',');
    out.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "damping",         "iterations",       "alpha",
      "beta",            "lambda",           "dpo_temperature",
      "score_epsilon",   "samples_per_problem", "k_values",
      "gas_reward_mode", "severity_threshold", "rank_mode",
      "secure_counting", "proportions",      "subsample_fraction",
      "seed"};
  return keys;
}

void set_config_value(Config& cfg, std::string_view key, std::string_view raw) {
  auto value = trim(raw);
  if (key == "damping") {
    cfg.damping = parse_number<double>(key, value);
  } else if (key == "iterations") {
    cfg.iterations = parse_number<int>(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_number<double>(key, value);
  } else if (key == "beta") {
    cfg.beta = parse_number<double>(key, value);
  } else if (key == "lambda") {
    cfg.lambda = parse_number<double>(key, value);
  } else if (key == "dpo_temperature") {
    cfg.dpo_temperature = parse_number<double>(key, value);
  } else if (key == "score_epsilon") {
    cfg.score_epsilon = parse_number<double>(key, value);
  } else if (key == "samples_per_problem") {
    cfg.samples_per_problem = parse_number<int>(key, value);
  } else if (key == "k_values") {
    cfg.k_values.clear();
    for (auto item : split_list(value)) cfg.k_values.push_back(parse_number<int>(key, item));
  } else if (key == "gas_reward_mode") {
    if (value == "raw") cfg.gas_reward_mode = GasRewardMode::raw;
    else if (value == "relative_clipped") cfg.gas_reward_mode = GasRewardMode::relative_clipped;
    else throw ConfigError("gas_reward_mode must be raw or relative_clipped, got '" + std::string(value) + "'");
  } else if (key == "severity_threshold") {
    auto s = parse_severity(value);
    if (!s) throw ConfigError("severity_threshold must be one of high, medium, low, info; got '" + std::string(value) + "'");
    cfg.severity_threshold = *s;
  } else if (key == "rank_mode") {
    if (value == "literal") cfg.rank_mode = RankMode::literal;
    else if (value == "stochastic") cfg.rank_mode = RankMode::stochastic;
    else throw ConfigError("rank_mode must be literal or stochastic, got '" + std::string(value) + "'");
  } else if (key == "secure_counting") {
    if (value == "compiled_only") cfg.secure_counting = SecureCounting::compiled_only;
    else if (value == "all_samples") cfg.secure_counting = SecureCounting::all_samples;
    else throw ConfigError("secure_counting must be compiled_only or all_samples, got '" + std::string(value) + "'");
  } else if (key == "proportions") {
    auto items = split_list(value);
    if (items.size() != 3) throw ConfigError("proportions needs three comma-separated values (correctness, security, gas)");
    for (std::size_t i = 0; i < 3; ++i) cfg.proportions[i] = parse_number<double>(key, items[i]);
  } else if (key == "subsample_fraction") {
    cfg.subsample_fraction = parse_number<double>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

Config parse_config(std::string_view text, const std::string& origin) {
  Config cfg;
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void validate_config(const Config& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(cfg.damping >= 0.0 && cfg.damping <= 1.0)) fail("damping must lie in [0, 1]");
  if (cfg.iterations < 1) fail("iterations must be a positive integer");
  if (!(cfg.alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(cfg.beta >= 0.0)) fail("beta must be >= 0");
  if (!(cfg.lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(cfg.dpo_temperature > 0.0)) fail("dpo_temperature must be > 0");
  if (!(cfg.score_epsilon >= 0.0)) fail("score_epsilon must be >= 0");
  if (cfg.samples_per_problem < 1) fail("samples_per_problem must be a positive integer");
  if (cfg.k_values.empty()) fail("k_values must not be empty");
  for (int k : cfg.k_values) {
    if (k < 1) fail("k_values entries must be positive, got " + std::to_string(k));
    if (k > cfg.samples_per_problem)
      fail("k=" + std::to_string(k) + " exceeds samples_per_problem n=" + std::to_string(cfg.samples_per_problem));
  }
  double sum = 0.0;
  for (double p : cfg.proportions) {
    if (!(p >= 0.0 && p <= 1.0)) fail("proportions must each lie in [0, 1]");
    sum += p;
  }
  if (sum > 1.0 + 1e-12) fail("proportions must sum to at most 1");
  if (!(cfg.subsample_fraction > 0.0 && cfg.subsample_fraction <= 1.0))
    fail("subsample_fraction must lie in (0, 1]");
}

std::string render_config(const Config& cfg) {
  std::ostringstream out;
  out << "damping = " << fmt_double(cfg.damping) << '\n'
      << "iterations = " << cfg.iterations << '\n'
      << "alpha = " << fmt_double(cfg.alpha) << '\n'
      << "beta = " << fmt_double(cfg.beta) << '\n'
      << "lambda = " << fmt_double(cfg.lambda) << '\n'
      << "dpo_temperature = " << fmt_double(cfg.dpo_temperature) << '\n'
      << "score_epsilon = " << fmt_double(cfg.score_epsilon) << '\n'
      << "samples_per_problem = " << cfg.samples_per_problem << '\n'
      << "k_values = ";
  for (std::size_t i = 0; i < cfg.k_values.size(); ++i) out << (i ? "," : "") << cfg.k_values[i];
  out << '\n'
      << "gas_reward_mode = " << to_string(cfg.gas_reward_mode) << '\n'
      << "severity_threshold = " << to_string(cfg.severity_threshold) << '\n'
      << "rank_mode = " << to_string(cfg.rank_mode) << '\n'
      << "secure_counting = " << to_string(cfg.secure_counting) << '\n'
      << "proportions = " << fmt_double(cfg.proportions[0]) << ',' << fmt_double(cfg.proportions[1]) << ','
      << fmt_double(cfg.proportions[2]) << '\n'
      << "subsample_fraction = " << fmt_double(cfg.subsample_fraction) << '\n'
      << "seed = " << cfg.seed << '\n';
  return out.str();
}

}  // namespace prefopt
