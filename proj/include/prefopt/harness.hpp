#pragma once

// Produces EvalRecords for candidates, either from recorded tool output or
// from a backend. Live compiler / test runner / analyzer drivers sit behind
// EvaluationBackend and are not part of this library.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "prefopt/exec.hpp"
#include "prefopt/model.hpp"

namespace prefopt {

struct RawFinding {
  std::string detector;
  std::string severity;

  bool operator==(const RawFinding&) const = default;
};

struct RawToolResult {
  std::string candidate_id;
  bool compiler_ok = false;
  bool tests_passed = false;
  std::optional<Gas> gas_used;
  std::vector<RawFinding> analysis_findings;
  std::map<std::string, bool> test_results;
};

/// Analyzer severity strings, case-insensitive: high, medium, low,
/// informational/info -> info, optimization -> info. Anything else is nullopt.
std::optional<Severity> map_tool_severity(std::string_view text);

/// True iff no finding is at or above `threshold`.
bool classify_secure(std::span<const Finding> findings, Severity threshold = Severity::high);

/// Maps severities and applies enforce_implications. Throws
/// DataError(schema) on an unknown severity string.
EvalRecord to_eval_record(const RawToolResult& raw);

/// Parses raw_results.jsonl. When `known_candidates` is given, an unknown
/// candidate_id is a DataError(reference). Every error carries its line.
std::vector<EvalRecord> ingest_results(const std::filesystem::path& file,
                                       const std::set<std::string>* known_candidates = nullptr);

class EvaluationBackend {
 public:
  virtual ~EvaluationBackend() = default;
  /// Must be deterministic in (problem, candidate).
  virtual RawToolResult evaluate(const Problem& problem, const Candidate& candidate) const = 0;
  /// True when evaluate() may be called from several threads at once.
  virtual bool reentrant() const { return false; }
};

/// Rule table keyed by candidate id or by SHA-256 of the candidate source.
/// Candidate-id rules win over content-hash rules.
class MockBackend final : public EvaluationBackend {
 public:
  struct Rule {
    bool compiled = false;
    bool passed = false;
    std::optional<Gas> gas;
    std::vector<RawFinding> findings;
    std::map<std::string, bool> test_results;
  };

  MockBackend() = default;
  static MockBackend from_file(const std::filesystem::path& rules_jsonl);

  void add_rule_for_id(std::string candidate_id, Rule rule);
  void add_rule_for_content(std::string sha256, Rule rule);

  RawToolResult evaluate(const Problem& problem, const Candidate& candidate) const override;
  bool reentrant() const override { return true; }

 private:
  std::map<std::string, Rule> by_id_;
  std::map<std::string, Rule> by_hash_;
};

/// Replays pre-recorded raw tool results keyed by candidate id.
class ReplayBackend final : public EvaluationBackend {
 public:
  static ReplayBackend from_file(const std::filesystem::path& raw_results_jsonl);

  RawToolResult evaluate(const Problem& problem, const Candidate& candidate) const override;
  bool reentrant() const override { return true; }

 private:
  std::map<std::string, RawToolResult> results_;
};

/// Runs every candidate through `backend`, converts and enforces
/// implications. Output is sorted by candidate id, so it does not depend on
/// input order. A backend failure is rethrown as BackendError naming the
/// candidate; no partial result is returned.
std::vector<EvalRecord> evaluate_all(const std::vector<Problem>& problems,
                                     const std::vector<Candidate>& candidates,
                                     const EvaluationBackend& backend, Exec exec = Exec::parallel);

}  // namespace prefopt
