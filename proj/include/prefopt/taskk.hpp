#pragma once

// Task@k: the unbiased estimate of the probability that at least one of k
// samples drawn without replacement from n satisfies a criterion, given that
// c of the n do. Pass@k, Compile@k, Gas@k and Secure@k are instantiations.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefopt/config.hpp"
#include "prefopt/exec.hpp"
#include "prefopt/model.hpp"

namespace prefopt {

/// 1 - C(n-c, k) / C(n, k), evaluated as 1 - prod_{i=n-c+1..n} (1 - k/i).
/// Returns exactly 1.0 when c > n - k. Throws DomainError unless
/// n >= 1, 0 <= c <= n and 1 <= k <= n.
double task_at_k(int n, int c, int k);

struct MetricCounts {
  int n = 0;
  int c_compile = 0;
  int c_pass = 0;
  int c_gas = 0;
  int c_secure = 0;
  /// Set when the problem has no reference gas; Gas@k is undefined for it.
  bool gas_excluded = false;

  bool operator==(const MetricCounts&) const = default;
};

/// Counts one problem's records. Records are expected to be
/// implication-enforced. A sample is gas-efficient iff it passed, has a gas
/// reading, and uses strictly less gas than the reference.
MetricCounts derive_counts(std::span<const EvalRecord> records, std::optional<Gas> reference_gas,
                           Severity severity_threshold = Severity::high,
                           SecureCounting secure_counting = SecureCounting::compiled_only);

/// Groups evals by their candidate's problem and counts each group. Problems
/// without any eval record are omitted. Throws DataError(reference) on an
/// eval whose candidate is unknown.
std::map<std::string, MetricCounts> count_by_problem(const std::vector<Problem>& problems,
                                                     const std::vector<Candidate>& candidates,
                                                     const std::vector<EvalRecord>& evals,
                                                     Severity severity_threshold, SecureCounting secure_counting,
                                                     Exec exec = Exec::parallel);

struct MetricRow {
  std::string problem_id;  // "ALL" for aggregate rows
  int k = 0;
  double pass = 0.0;
  double compile = 0.0;
  std::optional<double> gas;  // absent when excluded / no gas-eligible problem
  double secure = 0.0;
};

struct MetricReport {
  std::vector<int> k_values;
  /// Ordered by (problem_id, position of k in k_values).
  std::vector<MetricRow> per_problem;
  /// One "ALL" row per k: arithmetic means over problems. Gas excludes
  /// flagged problems.
  std::vector<MetricRow> aggregate;
  std::vector<std::string> problems_excluded_from_gas;
  SecureCounting secure_counting = SecureCounting::compiled_only;
  std::size_t problem_count = 0;
};

/// Throws DomainError naming the offending k and problem when some k exceeds
/// a problem's sample count.
MetricReport aggregate(const std::map<std::string, MetricCounts>& problem_counts, std::span<const int> k_values,
                       SecureCounting secure_counting = SecureCounting::compiled_only, Exec exec = Exec::parallel);

/// CSV with header `problem_id,k,pass,compile,gas,secure`; values with six
/// decimals, `NA` for undefined Gas@k; aggregate rows labeled ALL come last.
std::string render_csv(const MetricReport& report);
/// Aligned text table of the same rows, plus a metadata header.
std::string render_table(const MetricReport& report);

}  // namespace prefopt
