#pragma once

// Shared data model: problems, candidates, evaluation records and findings.
// All types are plain values; nothing here mutates after construction.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prefopt {

using Gas = std::uint64_t;

enum class Category { correctness, security, gas, unassigned };

/// Ordered so that `a >= b` means "at least as severe as".
enum class Severity { info = 0, low = 1, medium = 2, high = 3 };

std::string_view to_string(Category c);
std::string_view to_string(Severity s);
std::optional<Category> parse_category(std::string_view s);
/// Exact enum names only ("high", "medium", "low", "info").
std::optional<Severity> parse_severity(std::string_view s);

struct Problem {
  std::string id;
  std::string prompt;
  std::optional<Gas> reference_gas;
  Category category = Category::unassigned;

  bool operator==(const Problem&) const = default;
};

struct Candidate {
  std::string id;
  std::string problem_id;
  std::string model_id;
  std::string source;

  bool operator==(const Candidate&) const = default;
};

struct Finding {
  std::string detector;
  Severity severity = Severity::info;

  bool operator==(const Finding&) const = default;
};

struct EvalRecord {
  std::string candidate_id;
  bool compiled = false;
  bool passed = false;
  std::optional<Gas> gas;
  std::vector<Finding> findings;
  // Per-test pass bits for multi-test ranking; empty when only the
  // aggregate `passed` bit is known.
  std::map<std::string, bool> test_results;

  bool operator==(const EvalRecord&) const = default;
};

/// Forces passed=false when not compiled, clears gas when not passed, and
/// drops findings when not compiled, so counts satisfy
/// c_gas <= c_pass <= c_compile by construction.
EvalRecord enforce_implications(EvalRecord record);

struct Violation {
  enum class Kind {
    duplicate_id,
    dangling_reference,
    passed_without_compile,
    gas_without_pass,
    findings_without_compile,
  };
  Kind kind;
  std::string id;
  std::string message;

  bool operator==(const Violation&) const = default;
};

std::string_view to_string(Violation::Kind k);

using ValidationReport = std::vector<Violation>;

ValidationReport validate_dataset(const std::vector<Problem>& problems,
                                  const std::vector<Candidate>& candidates,
                                  const std::vector<EvalRecord>& evals);

}  // namespace prefopt
