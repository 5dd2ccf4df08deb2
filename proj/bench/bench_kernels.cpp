// Serial reference vs OpenMP kernels.
//
//   ./build/bench_kernels --benchmark_filter=Rank

#include <benchmark/benchmark.h>

#include <random>

#include "prefopt/loss.hpp"
#include "prefopt/ranker.hpp"
#include "prefopt/taskk.hpp"
#include "prefopt/toy_policy.hpp"

namespace {

using prefopt::Exec;

prefopt::BipartiteLinks random_graph(std::size_t codes, std::size_t tests, std::uint64_t seed) {
  std::vector<std::string> cids, tids;
  for (std::size_t i = 0; i < codes; ++i) cids.push_back("c" + std::to_string(i));
  for (std::size_t i = 0; i < tests; ++i) tids.push_back("t" + std::to_string(i));
  prefopt::BipartiteLinks g(cids, tids);
  std::mt19937_64 gen(seed);
  for (std::size_t t = 0; t < tests; ++t)
    for (std::size_t c = 0; c < codes; ++c) g.set(t, c, (gen() & 3) != 0);
  return g;
}

template <Exec E>
void BM_Rank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_graph(n, n / 2, 7);
  for (auto _ : state) {
    auto r = prefopt::rank(g, 0.85, 10, prefopt::RankMode::stochastic, E);
    benchmark::DoNotOptimize(r.code_scores.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n / 2) * 10);
}
BENCHMARK_TEMPLATE(BM_Rank, Exec::serial)->Arg(256)->Arg(1024);
BENCHMARK_TEMPLATE(BM_Rank, Exec::parallel)->Arg(256)->Arg(1024);

std::vector<prefopt::LossInput> random_inputs(std::size_t n) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> lp(-50.0, -1.0);
  std::vector<prefopt::LossInput> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& in = out[i];
    in.pair_id = "p" + std::to_string(i);
    in.policy_chosen = lp(gen);
    in.policy_rejected = lp(gen);
    in.ref_chosen = lp(gen);
    in.ref_rejected = lp(gen);
    in.gas_chosen = 40000 + gen() % 20000;
    in.gas_rejected = 40000 + gen() % 20000;
    in.safe_chosen = gen() & 1;
    in.safe_rejected = gen() & 1;
  }
  return out;
}

template <Exec E>
void BM_LossBatch(benchmark::State& state) {
  const auto inputs = random_inputs(static_cast<std::size_t>(state.range(0)));
  const prefopt::LossParams params;
  for (auto _ : state) {
    auto rows = prefopt::total_loss_batch(inputs, params, E);
    benchmark::DoNotOptimize(rows.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_LossBatch, Exec::serial)->Arg(1 << 16);
BENCHMARK_TEMPLATE(BM_LossBatch, Exec::parallel)->Arg(1 << 16);

template <Exec E>
void BM_FiniteDifferences(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(0));
  const auto policy = prefopt::ToyPolicy::random(8, vocab, 3);
  const auto reference = prefopt::ToyPolicy::random(8, vocab, 4);
  std::vector<prefopt::ToyPair> pairs;
  for (std::size_t i = 0; i < 32; ++i)
    pairs.push_back({"p" + std::to_string(i), i % 8, {i % vocab, (i + 1) % vocab}, {(i + 2) % vocab}, {}, {}, true, false});
  const prefopt::LossParams params;
  for (auto _ : state) {
    auto g = prefopt::finite_difference_gradient(policy, reference, pairs, params, 1e-5, E);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK_TEMPLATE(BM_FiniteDifferences, Exec::serial)->Arg(64);
BENCHMARK_TEMPLATE(BM_FiniteDifferences, Exec::parallel)->Arg(64);

template <Exec E>
void BM_Aggregate(benchmark::State& state) {
  std::map<std::string, prefopt::MetricCounts> counts;
  std::mt19937_64 gen(5);
  for (int i = 0; i < state.range(0); ++i) {
    prefopt::MetricCounts m;
    m.n = 10;
    m.c_compile = static_cast<int>(gen() % 11);
    m.c_pass = m.c_compile ? static_cast<int>(gen() % (m.c_compile + 1)) : 0;
    m.c_gas = m.c_pass ? static_cast<int>(gen() % (m.c_pass + 1)) : 0;
    m.c_secure = m.c_compile ? static_cast<int>(gen() % (m.c_compile + 1)) : 0;
    counts.emplace("p" + std::to_string(i), m);
  }
  const std::vector<int> ks{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  for (auto _ : state) {
    auto r = prefopt::aggregate(counts, ks, prefopt::SecureCounting::compiled_only, E);
    benchmark::DoNotOptimize(r.aggregate.data());
  }
}
BENCHMARK_TEMPLATE(BM_Aggregate, Exec::serial)->Arg(10000);
BENCHMARK_TEMPLATE(BM_Aggregate, Exec::parallel)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
