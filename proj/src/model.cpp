#include "prefopt/model.hpp"

#include <set>

namespace prefopt {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::correctness: return "correctness";
    case Category::security: return "security";
    case Category::gas: return "gas";
    case Category::unassigned: return "unassigned";
  }
  return "unassigned";
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::info: return "info";
    case Severity::low: return "low";
    case Severity::medium: return "medium";
    case Severity::high: return "high";
  }
  return "info";
}

std::optional<Category> parse_category(std::string_view s) {
  if (s == "correctness") return Category::correctness;
  if (s == "security") return Category::security;
  if (s == "gas") return Category::gas;
  if (s == "unassigned") return Category::unassigned;
  return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view s) {
  if (s == "high") return Severity::high;
  if (s == "medium") return Severity::medium;
  if (s == "low") return Severity::low;
  if (s == "info") return Severity::info;
  return std::nullopt;
}

std::string_view to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::duplicate_id: return "duplicate_id";
    case Violation::Kind::dangling_reference: return "dangling_reference";
    case Violation::Kind::passed_without_compile: return "passed_without_compile";
    case Violation::Kind::gas_without_pass: return "gas_without_pass";
    case Violation::Kind::findings_without_compile: return "findings_without_compile";
  }
  return "unknown";
}

EvalRecord enforce_implications(EvalRecord record) {
  if (!record.compiled) {
    record.passed = false;
    record.findings.clear();
  }
  if (!record.passed) record.gas.reset();
  return record;
}

ValidationReport validate_dataset(const std::vector<Problem>& problems,
                                  const std::vector<Candidate>& candidates,
                                  const std::vector<EvalRecord>& evals) {
  ValidationReport report;
  auto add = [&](Violation::Kind kind, const std::string& id, std::string msg) {
    report.push_back({kind, id, std::move(msg)});
  };

  std::set<std::string> problem_ids;
  for (const auto& p : problems) {
    if (!problem_ids.insert(p.id).second)
      add(Violation::Kind::duplicate_id, p.id, "problem id '" + p.id + "' appears more than once");
  }

  std::set<std::string> candidate_ids;
  for (const auto& c : candidates) {
    if (!candidate_ids.insert(c.id).second)
      add(Violation::Kind::duplicate_id, c.id, "candidate id '" + c.id + "' appears more than once");
    if (!problem_ids.contains(c.problem_id))
      add(Violation::Kind::dangling_reference, c.id,
          "candidate '" + c.id + "' references unknown problem '" + c.problem_id + "'");
  }

  std::set<std::string> evaluated;
  for (const auto& e : evals) {
    const auto& id = e.candidate_id;
    if (!evaluated.insert(id).second)
      add(Violation::Kind::duplicate_id, id, "candidate '" + id + "' has more than one eval record");
    if (!candidate_ids.contains(id))
      add(Violation::Kind::dangling_reference, id, "eval record references unknown candidate '" + id + "'");
    if (e.passed && !e.compiled)
      add(Violation::Kind::passed_without_compile, id, "candidate '" + id + "' passed but did not compile");
    if (e.gas && !e.passed)
      add(Violation::Kind::gas_without_pass, id, "candidate '" + id + "' has gas but did not pass");
    if (!e.compiled && !e.findings.empty())
      add(Violation::Kind::findings_without_compile, id,
          "candidate '" + id + "' has analysis findings but did not compile");
  }
  return report;
}

}  // namespace prefopt
