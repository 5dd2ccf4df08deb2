#pragma once

// Mutual-validation ranking of code snippets and test cases over the
// bipartite pass/fail graph. Every node starts at 1.0; each round
//
//   code(c) <- (1-d) code(c) + d * sum_t test(t) W(t,c)
//   test(t) <- (1-d) test(t) + d * sum_c code(c) W(c,t)
//
// with both updates reading the previous round only. W is the raw 0/1 link
// (literal) or the link divided by the source's out-degree (stochastic).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "prefopt/config.hpp"
#include "prefopt/exec.hpp"
#include "prefopt/model.hpp"

namespace prefopt {

class BipartiteLinks {
 public:
  /// Throws DomainError when either side is empty or ids repeat.
  BipartiteLinks(std::vector<std::string> code_ids, std::vector<std::string> test_ids);

  void set(std::size_t test, std::size_t code, bool passes);
  bool passes(std::size_t test, std::size_t code) const { return links_[test * codes_.size() + code] != 0; }

  const std::vector<std::string>& code_ids() const { return codes_; }
  const std::vector<std::string>& test_ids() const { return tests_; }
  std::size_t num_codes() const { return codes_.size(); }
  std::size_t num_tests() const { return tests_.size(); }

 private:
  std::vector<std::string> codes_;
  std::vector<std::string> tests_;
  std::vector<std::uint8_t> links_;  // row-major [test][code]
};

enum class NodeKind { code, test };

struct QualityScore {
  std::string node_id;
  NodeKind kind;
  double score;

  bool operator==(const QualityScore&) const = default;
};

struct RankResult {
  std::vector<double> code_scores;  // indexed like BipartiteLinks::code_ids()
  std::vector<double> test_scores;  // indexed like BipartiteLinks::test_ids()
};

/// Called after every round with (round, previous, next).
using RoundObserver = std::function<void(int, const RankResult&, const RankResult&)>;

/// Runs `iterations` synchronous rounds. Sums run over sources in list order,
/// so serial and parallel results are bit-identical. Throws DomainError for
/// damping outside [0, 1] or negative iterations.
RankResult rank(const BipartiteLinks& links, double damping, int iterations, RankMode mode = RankMode::stochastic,
                Exec exec = Exec::parallel, const RoundObserver& observer = {});

std::vector<QualityScore> to_quality_scores(const BipartiteLinks& links, const RankResult& result);

/// Ids of `kind` in descending score order; ties by ascending id.
std::vector<std::string> order_by_score(const std::vector<QualityScore>& scores, NodeKind kind);

struct TestCase {
  std::string test_id;
  std::string problem_id;
};

std::vector<TestCase> read_tests(const std::filesystem::path& path);

/// One graph per problem, codes sorted by id. Without explicit tests a
/// problem gets a single synthetic test "<problem_id>#tests" linked to every
/// candidate that passed. With tests, Link(t,c) is the candidate's
/// test_results[t] bit (false when missing or when the candidate did not
/// compile). Problems without candidates are skipped.
std::map<std::string, BipartiteLinks> build_links(const std::vector<Candidate>& candidates,
                                                  const std::vector<EvalRecord>& evals,
                                                  const std::vector<TestCase>& tests = {});

/// Ranks every problem's graph and concatenates scores in problem-id order.
std::vector<QualityScore> rank_all(const std::map<std::string, BipartiteLinks>& graphs, const Config& cfg,
                                   Exec exec = Exec::parallel);

std::string scores_to_jsonl(const std::vector<QualityScore>& scores);
std::vector<QualityScore> read_scores(const std::filesystem::path& path);

}  // namespace prefopt
