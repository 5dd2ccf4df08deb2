#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "prefopt/errors.hpp"
#include "prefopt/io.hpp"
#include "prefopt/ranker.hpp"

using namespace prefopt;

namespace {

// c1 passes t1 and t2; c2 passes t1 only.
BipartiteLinks two_by_two() {
  BipartiteLinks g({"c1", "c2"}, {"t1", "t2"});
  g.set(0, 0, true);
  g.set(1, 0, true);
  g.set(0, 1, true);
  return g;
}

BipartiteLinks random_graph(std::mt19937_64& gen, std::size_t nc, std::size_t nt) {
  std::vector<std::string> cids, tids;
  for (std::size_t i = 0; i < nc; ++i) cids.push_back("c" + std::to_string(i));
  for (std::size_t i = 0; i < nt; ++i) tids.push_back("t" + std::to_string(i));
  BipartiteLinks g(cids, tids);
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t c = 0; c < nc; ++c) g.set(t, c, gen() % 3 == 0);
  return g;
}

}  // namespace

TEST_CASE("rank: golden 2x2 scores from the synchronous-iteration oracle") {
  // Frozen from tests/oracles/ranker_oracle.py (exact rational arithmetic).
  auto g = two_by_two();
  auto s = rank(g, 0.85, 10, RankMode::stochastic);
  CHECK(std::abs(s.code_scores[0] - 1.3333325088048109) < 1e-9);
  CHECK(std::abs(s.code_scores[1] - 0.6666674911951892) < 1e-9);
  CHECK(std::abs(s.test_scores[0] - 1.3333325088048109) < 1e-9);
  CHECK(std::abs(s.test_scores[1] - 0.6666674911951892) < 1e-9);

  auto lit = rank(g, 0.85, 10, RankMode::literal);
  CHECK(std::abs(lit.code_scores[0] - 79.822474636598727) < 1e-9);
  CHECK(std::abs(lit.code_scores[1] - 49.333023582213478) < 1e-9);
  CHECK(std::abs(lit.test_scores[0] - 79.822474636598727) < 1e-9);
  CHECK(std::abs(lit.test_scores[1] - 49.333023582213478) < 1e-9);

  auto ordered = order_by_score(to_quality_scores(g, s), NodeKind::code);
  CHECK(ordered == std::vector<std::string>{"c1", "c2"});
}

TEST_CASE("rank: d = 0 keeps unit scores") {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 20; ++i) {
    auto g = random_graph(gen, 1 + gen() % 6, 1 + gen() % 6);
    for (auto mode : {RankMode::literal, RankMode::stochastic}) {
      auto s = rank(g, 0.0, 10, mode);
      for (double v : s.code_scores) CHECK(v == 1.0);
      for (double v : s.test_scores) CHECK(v == 1.0);
    }
  }
}

TEST_CASE("rank: single mutual link is a fixed point in stochastic mode") {
  BipartiteLinks g({"c"}, {"t"});
  g.set(0, 0, true);
  for (int m : {0, 1, 5, 50}) {
    auto s = rank(g, 0.85, m);
    CHECK(s.code_scores[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.test_scores[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("rank: identical link rows give identical scores") {
  BipartiteLinks g({"a", "b", "c"}, {"t1", "t2", "t3"});
  for (std::size_t t : {0u, 2u}) {
    g.set(t, 0, true);
    g.set(t, 1, true);
  }
  g.set(1, 2, true);
  g.set(2, 2, true);
  auto s = rank(g, 0.85, 10);
  CHECK(s.code_scores[0] == s.code_scores[1]);
}

TEST_CASE("rank: dominance") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(gen, 4, 5);
    // Make c0's passing set a strict superset of c1's.
    for (std::size_t t = 0; t < 5; ++t)
      if (g.passes(t, 1)) g.set(t, 0, true);
    std::size_t extra = gen() % 5;
    g.set(extra, 0, true);
    g.set(extra, 1, false);
    for (auto mode : {RankMode::literal, RankMode::stochastic}) {
      auto s = rank(g, 0.85, 1 + static_cast<int>(gen() % 10), mode);
      CHECK(s.code_scores[0] >= s.code_scores[1]);
    }
  }
}

TEST_CASE("rank: stochastic mode satisfies the damped mass balance every round") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_graph(gen, 1 + gen() % 7, 1 + gen() % 7);
    const double d = 0.85;
    std::vector<bool> test_has_links(g.num_tests()), code_has_links(g.num_codes());
    for (std::size_t t = 0; t < g.num_tests(); ++t)
      for (std::size_t c = 0; c < g.num_codes(); ++c)
        if (g.passes(t, c)) test_has_links[t] = code_has_links[c] = true;
    int rounds = 0;
    rank(g, d, 10, RankMode::stochastic, Exec::serial, [&](int, const RankResult& prev, const RankResult& next) {
      ++rounds;
      double code_prev = 0, code_next = 0, code_recv = 0, test_prev = 0, test_next = 0, test_recv = 0;
      for (std::size_t c = 0; c < g.num_codes(); ++c) {
        code_prev += prev.code_scores[c];
        code_next += next.code_scores[c];
        if (code_has_links[c]) test_recv += prev.code_scores[c];
      }
      for (std::size_t t = 0; t < g.num_tests(); ++t) {
        test_prev += prev.test_scores[t];
        test_next += next.test_scores[t];
        if (test_has_links[t]) code_recv += prev.test_scores[t];
      }
      CHECK(std::abs(code_next - ((1 - d) * code_prev + d * code_recv)) < 1e-9);
      CHECK(std::abs(test_next - ((1 - d) * test_prev + d * test_recv)) < 1e-9);
    });
    CHECK(rounds == 10);
  }
}

TEST_CASE("rank: serial and parallel kernels are bit-identical") {
  std::mt19937_64 gen(12);
  auto g = random_graph(gen, 300, 120);
  for (auto mode : {RankMode::literal, RankMode::stochastic}) {
    auto a = rank(g, 0.85, 10, mode, Exec::serial);
    auto b = rank(g, 0.85, 10, mode, Exec::parallel);
    CHECK(a.code_scores == b.code_scores);
    CHECK(a.test_scores == b.test_scores);
  }
}

TEST_CASE("rank: domain errors") {
  auto g = two_by_two();
  CHECK_THROWS_AS(rank(g, -0.1, 10), DomainError);
  CHECK_THROWS_AS(rank(g, 1.1, 10), DomainError);
  CHECK_THROWS_AS(BipartiteLinks({}, {"t"}), DomainError);
  CHECK_THROWS_AS(BipartiteLinks({"a", "a"}, {"t"}), DomainError);
}

TEST_CASE("order_by_score") {
  std::vector<QualityScore> s{{"b", NodeKind::code, 1.0}, {"a", NodeKind::code, 2.0}, {"t", NodeKind::test, 9.0}};
  CHECK(order_by_score(s, NodeKind::code) == std::vector<std::string>{"a", "b"});
  s[1].score = 1.0;
  CHECK(order_by_score(s, NodeKind::code) == std::vector<std::string>{"a", "b"});
  CHECK(order_by_score(s, NodeKind::test) == std::vector<std::string>{"t"});
}

TEST_CASE("build_links: single synthetic test and explicit multi-test graphs") {
  std::vector<Candidate> cands{{"b", "p", "m", ""}, {"a", "p", "m", ""}, {"c", "q", "m", ""}};
  std::vector<EvalRecord> evals{{"a", true, true, 1, {}, {{"t1", true}, {"t2", true}}},
                                {"b", true, false, {}, {}, {{"t1", true}}},
                                {"c", false, false, {}, {}, {{"tq", true}}}};
  auto single = build_links(cands, evals);
  REQUIRE(single.size() == 2);
  const auto& gp = single.at("p");
  CHECK(gp.code_ids() == std::vector<std::string>{"a", "b"});
  CHECK(gp.test_ids() == std::vector<std::string>{"p#tests"});
  CHECK(gp.passes(0, 0));
  CHECK_FALSE(gp.passes(0, 1));

  auto multi = build_links(cands, evals, {{"t2", "p"}, {"t1", "p"}, {"tq", "q"}});
  const auto& mp = multi.at("p");
  CHECK(mp.test_ids() == std::vector<std::string>{"t1", "t2"});
  CHECK(mp.passes(0, 0));
  CHECK(mp.passes(0, 1));
  CHECK(mp.passes(1, 0));
  CHECK_FALSE(mp.passes(1, 1));
  CHECK_FALSE(multi.at("q").passes(0, 0));  // did not compile
}

TEST_CASE("scores.jsonl round-trip") {
  auto g = two_by_two();
  auto scores = to_quality_scores(g, rank(g, 0.85, 10));
  auto text = scores_to_jsonl(scores);
  const auto path = std::filesystem::temp_directory_path() / "prefopt_scores.jsonl";
  atomic_write(path, text);
  CHECK(read_scores(path) == scores);
  std::filesystem::remove(path);
}
