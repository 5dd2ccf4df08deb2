#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefopt/model.hpp"

namespace prefopt {

enum class GasRewardMode { raw, relative_clipped };
enum class RankMode { literal, stochastic };
/// Which samples are eligible to count as secure for Secure@k.
enum class SecureCounting { compiled_only, all_samples };

std::string_view to_string(GasRewardMode m);
std::string_view to_string(RankMode m);
std::string_view to_string(SecureCounting m);

struct Config {
  double damping = 0.85;
  int iterations = 10;
  double alpha = 1.0;
  double beta = 1.0;
  double lambda = 0.5;
  double dpo_temperature = 0.1;
  double score_epsilon = 1e-6;
  int samples_per_problem = 10;
  std::vector<int> k_values{1, 5, 10};
  GasRewardMode gas_reward_mode = GasRewardMode::relative_clipped;
  Severity severity_threshold = Severity::high;

  RankMode rank_mode = RankMode::stochastic;
  SecureCounting secure_counting = SecureCounting::compiled_only;
  /// Seed split as (correctness, security, gas); the remainder stays unassigned.
  std::array<double, 3> proportions{0.5, 0.25, 0.25};
  double subsample_fraction = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const Config&) const = default;
};

/// Every key accepted in a config file or as a `--<key>` flag, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual form. Throws ConfigError on unknown key
/// or unparsable value.
void set_config_value(Config& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines; `#` starts a comment. Unset keys keep their defaults.
Config parse_config(std::string_view text, const std::string& origin = "<config>");
Config load_config(const std::filesystem::path& path);

/// Throws ConfigError describing the first invariant that does not hold.
void validate_config(const Config& cfg);

/// Canonical `key = value` rendering; parse_config(render_config(c)) == c.
std::string render_config(const Config& cfg);

}  // namespace prefopt
