#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "prefopt/errors.hpp"
#include "prefopt/io.hpp"
#include "prefopt/loss.hpp"

using namespace prefopt;

namespace {

LossInput with_margin(double m) {
  LossInput in;
  in.pair_id = "x";
  in.policy_chosen = -10.0 + m;
  in.policy_rejected = -10.0;
  in.ref_chosen = -10.0;
  in.ref_rejected = -10.0;
  return in;
}

LossInput random_input(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> lp(-80.0, -0.5);
  LossInput in;
  in.pair_id = "r" + std::to_string(gen() % 100000);
  in.policy_chosen = lp(gen);
  in.policy_rejected = lp(gen);
  in.ref_chosen = lp(gen);
  in.ref_rejected = lp(gen);
  if (gen() % 3 != 0) {
    in.gas_chosen = gen() % 100000;
    in.gas_rejected = gen() % 100000;
  }
  in.safe_chosen = gen() & 1;
  in.safe_rejected = gen() & 1;
  return in;
}

LossInput swap_sides(LossInput in) {
  std::swap(in.policy_chosen, in.policy_rejected);
  std::swap(in.ref_chosen, in.ref_rejected);
  std::swap(in.gas_chosen, in.gas_rejected);
  std::swap(in.safe_chosen, in.safe_rejected);
  return in;
}

}  // namespace

TEST_CASE("sft_loss") {
  const std::vector<double> half(4, -std::log(2.0));
  CHECK(sft_loss(half) == doctest::Approx(2.772588722239781).epsilon(1e-15));
  const std::vector<double> v{-0.1, -0.3};
  CHECK(sft_loss(v, Reduction::mean) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(sft_loss(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(sft_loss(std::vector<double>{-1.0, 0.5}), DomainError);
}

TEST_CASE("dpo_loss") {
  CHECK(std::abs(dpo_loss(with_margin(0.0), 0.1) - 0.693147180559945309) < 1e-12);
  CHECK(std::abs(dpo_loss(with_margin(1.0), 0.1) - 0.644396660073570892) < 1e-12);
  CHECK(dpo_loss(with_margin(1e6), 1.0) >= 0.0);
  CHECK(dpo_loss(with_margin(1e6), 1.0) < 1e-300);
  CHECK(dpo_loss(with_margin(-1e6), 1.0) == doctest::Approx(1e6));
  CHECK_FALSE(std::isnan(dpo_loss(with_margin(-1e308), 10.0)));
  CHECK_THROWS_AS(dpo_loss(with_margin(0.0), 0.0), DomainError);
  CHECK_THROWS_AS(dpo_loss(with_margin(0.0), -1.0), DomainError);

  SUBCASE("nonnegative, decreasing and convex in the margin") {
    double prev = INFINITY;
    std::vector<double> values;
    for (double m = -50.0; m <= 50.0; m += 0.5) {
      const double l = dpo_loss(with_margin(m), 0.1);
      CHECK(l >= 0.0);
      CHECK(l < prev);
      prev = l;
      values.push_back(l);
    }
    for (std::size_t i = 1; i + 1 < values.size(); ++i) CHECK(values[i - 1] + values[i + 1] >= 2 * values[i] - 1e-15);
  }
}

TEST_CASE("gas_reward") {
  CHECK(gas_reward(50000, 60000, GasRewardMode::raw) == 10000.0);
  CHECK(gas_reward(50000, 60000, GasRewardMode::relative_clipped) == doctest::Approx(0.1666666666666667).epsilon(1e-15));
  CHECK(gas_reward(60000, 60000, GasRewardMode::raw) == 0.0);
  CHECK(gas_reward(60000, 60000, GasRewardMode::relative_clipped) == 0.0);
  CHECK(gas_reward(0, 0, GasRewardMode::relative_clipped) == 0.0);
  CHECK(gas_reward(std::nullopt, std::nullopt, GasRewardMode::raw) == 0.0);
  CHECK_THROWS_AS(gas_reward(5, std::nullopt, GasRewardMode::raw), DomainError);
  CHECK_THROWS_AS(gas_reward(std::nullopt, 5, GasRewardMode::relative_clipped), DomainError);

  std::mt19937_64 gen(4);
  for (int i = 0; i < 2000; ++i) {
    const Gas a = gen() % 1000000, b = gen() % 1000000;
    const double raw = gas_reward(a, b, GasRewardMode::raw);
    const double rel = gas_reward(a, b, GasRewardMode::relative_clipped);
    CHECK(rel >= -1.0);
    CHECK(rel <= 1.0);
    CHECK((raw > 0) == (rel > 0));
    CHECK((raw < 0) == (rel < 0));
    CHECK(gas_reward(b, a, GasRewardMode::raw) == -raw);
    CHECK(gas_reward(b, a, GasRewardMode::relative_clipped) == -rel);
  }
}

TEST_CASE("security_reward") {
  CHECK(security_reward(true, false) == 1);
  CHECK(security_reward(false, true) == -1);
  CHECK(security_reward(true, true) == 0);
  CHECK(security_reward(false, false) == 0);
}

TEST_CASE("total_loss") {
  auto in = with_margin(0.0);
  in.gas_chosen = 60000;
  in.gas_rejected = 60000;
  in.safe_chosen = true;
  in.safe_rejected = false;
  const auto b = total_loss(in, LossParams{});
  CHECK(b.r_v == 1.0);
  CHECK(b.r_g == 0.0);
  CHECK(b.r_extra == 1.0);
  CHECK(std::abs(b.l_total - 0.193147180559945309) < 1e-12);
}

TEST_CASE("total_loss: degenerate weights and antisymmetry on random inputs") {
  std::mt19937_64 gen(77);
  for (int i = 0; i < 2000; ++i) {
    const auto in = random_input(gen);
    for (auto mode : {GasRewardMode::raw, GasRewardMode::relative_clipped}) {
      LossParams p{1.0, 1.0, 0.5, 0.1, mode};
      const auto full = total_loss(in, p);
      CHECK(full.l_total == full.l_dpo + p.lambda * (-full.r_extra));
      CHECK((full.r_v == -1.0 || full.r_v == 0.0 || full.r_v == 1.0));

      auto no_lambda = p;
      no_lambda.lambda = 0.0;
      CHECK(total_loss(in, no_lambda).l_total == dpo_loss(in, p.tau));

      auto no_rewards = p;
      no_rewards.alpha = no_rewards.beta = 0.0;
      CHECK(total_loss(in, no_rewards).l_total == dpo_loss(in, p.tau));

      const auto swapped = total_loss(swap_sides(in), p);
      CHECK(swapped.r_g == -full.r_g);
      CHECK(swapped.r_v == -full.r_v);
      CHECK(preference_margin(swap_sides(in)) == -preference_margin(in));
    }
  }
}

TEST_CASE("total_loss_batch: serial and parallel agree bitwise") {
  std::mt19937_64 gen(3);
  std::vector<LossInput> inputs;
  for (int i = 0; i < 5000; ++i) inputs.push_back(random_input(gen));
  const LossParams p;
  const auto a = total_loss_batch(inputs, p, Exec::serial);
  const auto b = total_loss_batch(inputs, p, Exec::parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].l_total == b[i].l_total);
    CHECK(a[i].l_dpo == b[i].l_dpo);
  }
  inputs[10].gas_rejected.reset();
  inputs[10].gas_chosen = 1;
  CHECK_THROWS_AS(total_loss_batch(inputs, p, Exec::parallel), DomainError);
  CHECK_THROWS_AS(total_loss_batch(inputs, p, Exec::serial), DomainError);
}

TEST_CASE("summarize and report") {
  std::vector<LossInput> inputs{with_margin(0.0), with_margin(0.0)};
  inputs[1].pair_id = "y";
  inputs[1].safe_chosen = true;
  LossParams p;
  const auto rows = total_loss_batch(inputs, p);
  const auto s = summarize(rows);
  CHECK(s.count == 2);
  CHECK(s.mean.r_v == 0.5);
  CHECK(s.sum.l_dpo == doctest::Approx(2 * std::log(2.0)));
  const auto text = loss_report_jsonl(inputs, rows, p);
  CHECK(text.find("\"pair_id\":\"y\"") != std::string::npos);
  CHECK(text.find("{\"summary\":{\"count\":2") != std::string::npos);
}

TEST_CASE("read_loss_inputs") {
  const auto path = std::filesystem::temp_directory_path() / "prefopt_loss_inputs.jsonl";
  atomic_write(path,
               "{\"pair_id\":\"a\",\"logp\":{\"policy_chosen\":-1,\"policy_rejected\":-2,\"ref_chosen\":-1.5,"
               "\"ref_rejected\":-1.5},\"gas_chosen\":10,\"gas_rejected\":20,\"safe_chosen\":true,\"safe_rejected\":false}\n");
  const auto in = read_loss_inputs(path);
  REQUIRE(in.size() == 1);
  CHECK(preference_margin(in[0]) == 1.0);
  CHECK(in[0].gas_rejected == Gas{20});
  atomic_write(path, "{\"pair_id\":\"a\",\"logp\":{\"policy_chosen\":-1,\"policy_rejected\":-2,\"ref_chosen\":-1.5,"
                     "\"ref_rejected\":-1.5},\"gas_chosen\":10,\"safe_chosen\":true,\"safe_rejected\":false}\n");
  CHECK_THROWS_AS(read_loss_inputs(path), DataError);
  std::filesystem::remove(path);
}
