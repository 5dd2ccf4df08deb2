#include "prefopt/ranker.hpp"

#include <algorithm>
#include <set>

#include "prefopt/errors.hpp"
#include "prefopt/io.hpp"

namespace prefopt {

namespace fs = std::filesystem;

BipartiteLinks::BipartiteLinks(std::vector<std::string> code_ids, std::vector<std::string> test_ids)
    : codes_(std::move(code_ids)), tests_(std::move(test_ids)), links_(codes_.size() * tests_.size(), 0) {
  if (codes_.empty() || tests_.empty()) throw DomainError("bipartite graph needs at least one code and one test");
  if (std::set<std::string>(codes_.begin(), codes_.end()).size() != codes_.size())
    throw DomainError("duplicate code id in bipartite graph");
  if (std::set<std::string>(tests_.begin(), tests_.end()).size() != tests_.size())
    throw DomainError("duplicate test id in bipartite graph");
}

void BipartiteLinks::set(std::size_t test, std::size_t code, bool passes) {
  if (test >= tests_.size() || code >= codes_.size()) throw DomainError("link index out of range");
  links_[test * codes_.size() + code] = passes ? 1 : 0;
}

namespace {

// Per-source weight: 1 in literal mode, 1/out-degree in stochastic mode,
// 0 for a source without links.
std::vector<double> source_weights(const BipartiteLinks& g, RankMode mode, NodeKind source) {
  const std::size_t nc = g.num_codes();
  const std::size_t nt = g.num_tests();
  const std::size_t n = source == NodeKind::test ? nt : nc;
  std::vector<double> w(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    int degree = 0;
    if (source == NodeKind::test) {
      for (std::size_t c = 0; c < nc; ++c) degree += g.passes(s, c);
    } else {
      for (std::size_t t = 0; t < nt; ++t) degree += g.passes(t, s);
    }
    if (degree > 0) w[s] = mode == RankMode::literal ? 1.0 : 1.0 / static_cast<double>(degree);
  }
  return w;
}

double code_update(const BipartiteLinks& g, const RankResult& prev, const std::vector<double>& test_w, double d,
                   std::size_t c) {
  double received = 0.0;
  for (std::size_t t = 0; t < g.num_tests(); ++t) {
    if (g.passes(t, c)) received += prev.test_scores[t] * test_w[t];
  }
  return (1.0 - d) * prev.code_scores[c] + d * received;
}

double test_update(const BipartiteLinks& g, const RankResult& prev, const std::vector<double>& code_w, double d,
                   std::size_t t) {
  double received = 0.0;
  for (std::size_t c = 0; c < g.num_codes(); ++c) {
    if (g.passes(t, c)) received += prev.code_scores[c] * code_w[c];
  }
  return (1.0 - d) * prev.test_scores[t] + d * received;
}

}  // namespace

RankResult rank(const BipartiteLinks& links, double damping, int iterations, RankMode mode, Exec exec,
                const RoundObserver& observer) {
  if (!(damping >= 0.0 && damping <= 1.0)) throw DomainError("damping must lie in [0, 1]");
  if (iterations < 0) throw DomainError("iterations must be >= 0");

  const auto test_w = source_weights(links, mode, NodeKind::test);
  const auto code_w = source_weights(links, mode, NodeKind::code);
  const long nc = static_cast<long>(links.num_codes());
  const long nt = static_cast<long>(links.num_tests());

  RankResult cur{std::vector<double>(nc, 1.0), std::vector<double>(nt, 1.0)};
  RankResult next = cur;
  for (int m = 1; m <= iterations; ++m) {
    if (exec == Exec::parallel) {
#pragma omp parallel
      {
#pragma omp for nowait
        for (long c = 0; c < nc; ++c) next.code_scores[c] = code_update(links, cur, test_w, damping, c);
#pragma omp for
        for (long t = 0; t < nt; ++t) next.test_scores[t] = test_update(links, cur, code_w, damping, t);
      }
    } else {
      for (long c = 0; c < nc; ++c) next.code_scores[c] = code_update(links, cur, test_w, damping, c);
      for (long t = 0; t < nt; ++t) next.test_scores[t] = test_update(links, cur, code_w, damping, t);
    }
    if (observer) observer(m, cur, next);
    std::swap(cur, next);
  }
  return cur;
}

std::vector<QualityScore> to_quality_scores(const BipartiteLinks& links, const RankResult& result) {
  std::vector<QualityScore> out;
  out.reserve(links.num_codes() + links.num_tests());
  for (std::size_t c = 0; c < links.num_codes(); ++c)
    out.push_back({links.code_ids()[c], NodeKind::code, result.code_scores[c]});
  for (std::size_t t = 0; t < links.num_tests(); ++t)
    out.push_back({links.test_ids()[t], NodeKind::test, result.test_scores[t]});
  return out;
}

std::vector<std::string> order_by_score(const std::vector<QualityScore>& scores, NodeKind kind) {
  std::vector<const QualityScore*> picked;
  for (const auto& s : scores) {
    if (s.kind == kind) picked.push_back(&s);
  }
  std::sort(picked.begin(), picked.end(), [](const QualityScore* a, const QualityScore* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->node_id < b->node_id;
  });
  std::vector<std::string> out;
  out.reserve(picked.size());
  for (const auto* s : picked) out.push_back(s->node_id);
  return out;
}

std::vector<TestCase> read_tests(const fs::path& path) {
  std::vector<TestCase> out;
  const auto name = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    out.push_back({cur.str("test_id"), cur.str("problem_id")});
  });
  return out;
}

std::map<std::string, BipartiteLinks> build_links(const std::vector<Candidate>& candidates,
                                                  const std::vector<EvalRecord>& evals,
                                                  const std::vector<TestCase>& tests) {
  std::map<std::string, const EvalRecord*> eval_of;
  for (const auto& e : evals) eval_of.emplace(e.candidate_id, &e);

  std::map<std::string, std::vector<std::string>> codes_by_problem;
  for (const auto& c : candidates) codes_by_problem[c.problem_id].push_back(c.id);

  std::map<std::string, std::vector<std::string>> tests_by_problem;
  for (const auto& t : tests) tests_by_problem[t.problem_id].push_back(t.test_id);

  std::map<std::string, BipartiteLinks> out;
  for (auto& [pid, codes] : codes_by_problem) {
    std::sort(codes.begin(), codes.end());
    auto tit = tests_by_problem.find(pid);
    const bool explicit_tests = tit != tests_by_problem.end();
    std::vector<std::string> test_ids = explicit_tests ? tit->second : std::vector<std::string>{pid + "#tests"};
    if (explicit_tests) std::sort(test_ids.begin(), test_ids.end());

    BipartiteLinks g(codes, test_ids);
    for (std::size_t c = 0; c < codes.size(); ++c) {
      auto eit = eval_of.find(codes[c]);
      if (eit == eval_of.end())
        throw DataError(DataError::Kind::reference, {}, 0, "no eval record for candidate '" + codes[c] + "'");
      const EvalRecord& e = *eit->second;
      for (std::size_t t = 0; t < test_ids.size(); ++t) {
        bool pass = false;
        if (!explicit_tests) {
          pass = e.passed;
        } else if (e.compiled) {
          auto bit = e.test_results.find(test_ids[t]);
          pass = bit != e.test_results.end() && bit->second;
        }
        g.set(t, c, pass);
      }
    }
    out.emplace(pid, std::move(g));
  }
  return out;
}

std::vector<QualityScore> rank_all(const std::map<std::string, BipartiteLinks>& graphs, const Config& cfg,
                                   Exec exec) {
  std::vector<QualityScore> out;
  for (const auto& [pid, g] : graphs) {
    auto scores = to_quality_scores(g, rank(g, cfg.damping, cfg.iterations, cfg.rank_mode, exec));
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

std::string scores_to_jsonl(const std::vector<QualityScore>& scores) {
  std::string out;
  for (const auto& s : scores) {
    OrderedJson j;
    j["node_id"] = s.node_id;
    j["kind"] = s.kind == NodeKind::code ? "code" : "test";
    j["score"] = s.score;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<QualityScore> read_scores(const fs::path& path) {
  std::vector<QualityScore> out;
  const auto name = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    auto kind = cur.str("kind");
    if (kind != "code" && kind != "test") cur.fail("kind must be 'code' or 'test', got '" + kind + "'");
    out.push_back({cur.str("node_id"), kind == "code" ? NodeKind::code : NodeKind::test, cur.number("score")});
  });
  return out;
}

}  // namespace prefopt
