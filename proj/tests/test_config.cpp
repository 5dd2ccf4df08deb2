#include <doctest.h>

#include "prefopt/config.hpp"
#include "prefopt/errors.hpp"

using namespace prefopt;

TEST_CASE("config defaults") {
  Config c;
  CHECK(c.damping == 0.85);
  CHECK(c.iterations == 10);
  CHECK(c.alpha == 1.0);
  CHECK(c.beta == 1.0);
  CHECK(c.lambda == 0.5);
  CHECK(c.dpo_temperature == 0.1);
  CHECK(c.samples_per_problem == 10);
  CHECK(c.score_epsilon == 1e-6);
  CHECK(c.gas_reward_mode == GasRewardMode::relative_clipped);
  CHECK(c.severity_threshold == Severity::high);
  CHECK(c.rank_mode == RankMode::stochastic);
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("config file parsing and rendering round-trip") {
  auto c = parse_config(
      "# comment\n"
      "damping = 0.5\n"
      "k_values = 1, 2 ,3\n"
      "gas_reward_mode = raw   # trailing comment\n"
      "severity_threshold = medium\n"
      "proportions = 0.6,0.2,0.2\n"
      "seed = 42\n");
  CHECK(c.damping == 0.5);
  CHECK(c.k_values == std::vector<int>{1, 2, 3});
  CHECK(c.gas_reward_mode == GasRewardMode::raw);
  CHECK(c.severity_threshold == Severity::medium);
  CHECK(c.seed == 42);
  CHECK(parse_config(render_config(c)) == c);
  CHECK(parse_config(render_config(Config{})) == Config{});
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_WITH(parse_config("\n\ndamping = high\n", "cfg"), doctest::Contains("cfg:3"));
  CHECK_THROWS_AS(parse_config("severity_threshold = critical\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);

  Config c;
  c.k_values = {1, 11};
  CHECK_THROWS_WITH(validate_config(c), doctest::Contains("k=11"));
  c = Config{};
  c.damping = 1.5;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  c = Config{};
  c.dpo_temperature = 0.0;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  c = Config{};
  c.proportions = {0.6, 0.3, 0.2};
  CHECK_THROWS_AS(validate_config(c), ConfigError);
}
