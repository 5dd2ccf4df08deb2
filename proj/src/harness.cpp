#include "prefopt/harness.hpp"

#include <algorithm>
#include <cctype>
#include <exception>

#include "prefopt/errors.hpp"
#include "prefopt/io.hpp"

namespace prefopt {

namespace fs = std::filesystem;

std::optional<Severity> map_tool_severity(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "high") return Severity::high;
  if (lower == "medium") return Severity::medium;
  if (lower == "low") return Severity::low;
  if (lower == "informational" || lower == "info") return Severity::info;
  if (lower == "optimization") return Severity::info;
  return std::nullopt;
}

bool classify_secure(std::span<const Finding> findings, Severity threshold) {
  return std::none_of(findings.begin(), findings.end(),
                      [&](const Finding& f) { return f.severity >= threshold; });
}

namespace {

EvalRecord convert(const RawToolResult& raw, const std::string& file, std::size_t line) {
  EvalRecord e;
  e.candidate_id = raw.candidate_id;
  e.compiled = raw.compiler_ok;
  e.passed = raw.tests_passed;
  e.gas = raw.gas_used;
  e.test_results = raw.test_results;
  for (const auto& f : raw.analysis_findings) {
    auto sev = map_tool_severity(f.severity);
    if (!sev)
      throw DataError(DataError::Kind::schema, file, line,
                      "unknown severity '" + f.severity + "' for candidate '" + raw.candidate_id + "'");
    e.findings.push_back({f.detector, *sev});
  }
  return enforce_implications(std::move(e));
}

std::vector<RawFinding> parse_raw_findings(const JsonlCursor& cur, const char* key) {
  std::vector<RawFinding> out;
  auto it = cur.obj.find(key);
  if (it == cur.obj.end() || it->is_null()) return out;
  if (!it->is_array()) cur.fail(std::string("field '") + key + "' must be an array");
  for (const auto& f : *it) {
    if (!f.is_object()) cur.fail("finding entries must be objects");
    JsonlCursor fc{f, cur.file, cur.line};
    out.push_back({fc.str("detector"), fc.str("severity")});
  }
  return out;
}

std::map<std::string, bool> parse_bits(const JsonlCursor& cur) {
  std::map<std::string, bool> out;
  auto it = cur.obj.find("test_results");
  if (it == cur.obj.end() || it->is_null()) return out;
  if (!it->is_object()) cur.fail("field 'test_results' must be an object");
  for (const auto& [k, v] : it->items()) {
    if (!v.is_boolean()) cur.fail("test_results['" + k + "'] must be true or false");
    out.emplace(k, v.get<bool>());
  }
  return out;
}

RawToolResult parse_raw(const JsonlCursor& cur) {
  RawToolResult r;
  r.candidate_id = cur.str("candidate_id");
  r.compiler_ok = cur.boolean("compiler_ok");
  r.tests_passed = cur.boolean("tests_passed");
  r.gas_used = cur.gas("gas_used");
  r.analysis_findings = parse_raw_findings(cur, "analysis_findings");
  r.test_results = parse_bits(cur);
  return r;
}

}  // namespace

EvalRecord to_eval_record(const RawToolResult& raw) { return convert(raw, {}, 0); }

std::vector<EvalRecord> ingest_results(const fs::path& file, const std::set<std::string>* known_candidates) {
  std::vector<EvalRecord> out;
  const auto name = file.string();
  for_each_jsonl(file, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    auto raw = parse_raw(cur);
    if (known_candidates && !known_candidates->contains(raw.candidate_id))
      throw DataError(DataError::Kind::reference, name, line, "unknown candidate_id '" + raw.candidate_id + "'");
    out.push_back(convert(raw, name, line));
  });
  return out;
}

MockBackend MockBackend::from_file(const fs::path& rules_jsonl) {
  MockBackend backend;
  const auto name = rules_jsonl.string();
  for_each_jsonl(rules_jsonl, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    Rule rule;
    rule.compiled = cur.boolean("compiled");
    rule.passed = cur.boolean("passed");
    rule.gas = cur.gas("gas");
    rule.findings = parse_raw_findings(cur, "findings");
    rule.test_results = parse_bits(cur);
    for (const auto& f : rule.findings) {
      if (!map_tool_severity(f.severity)) cur.fail("unknown severity '" + f.severity + "'");
    }
    const bool by_id = cur.has("candidate_id");
    const bool by_hash = cur.has("content_sha256");
    if (by_id == by_hash) cur.fail("rule needs exactly one of 'candidate_id' or 'content_sha256'");
    if (by_id) {
      auto id = cur.str("candidate_id");
      if (backend.by_id_.contains(id)) cur.fail("duplicate rule for candidate '" + id + "'");
      backend.by_id_.emplace(std::move(id), std::move(rule));
    } else {
      auto hash = cur.str("content_sha256");
      if (backend.by_hash_.contains(hash)) cur.fail("duplicate rule for content hash " + hash);
      backend.by_hash_.emplace(std::move(hash), std::move(rule));
    }
  });
  return backend;
}

void MockBackend::add_rule_for_id(std::string candidate_id, Rule rule) {
  by_id_.insert_or_assign(std::move(candidate_id), std::move(rule));
}

void MockBackend::add_rule_for_content(std::string sha256, Rule rule) {
  by_hash_.insert_or_assign(std::move(sha256), std::move(rule));
}

RawToolResult MockBackend::evaluate(const Problem&, const Candidate& candidate) const {
  const Rule* rule = nullptr;
  if (auto it = by_id_.find(candidate.id); it != by_id_.end()) {
    rule = &it->second;
  } else if (auto ht = by_hash_.find(sha256_hex(candidate.source)); ht != by_hash_.end()) {
    rule = &ht->second;
  }
  if (!rule) throw BackendError("mock backend has no rule for candidate '" + candidate.id + "'");
  return {candidate.id, rule->compiled, rule->passed, rule->gas, rule->findings, rule->test_results};
}

ReplayBackend ReplayBackend::from_file(const fs::path& raw_results_jsonl) {
  ReplayBackend backend;
  const auto name = raw_results_jsonl.string();
  for_each_jsonl(raw_results_jsonl, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    auto raw = parse_raw(cur);
    for (const auto& f : raw.analysis_findings) {
      if (!map_tool_severity(f.severity)) cur.fail("unknown severity '" + f.severity + "'");
    }
    auto id = raw.candidate_id;
    if (!backend.results_.emplace(id, std::move(raw)).second) cur.fail("duplicate result for candidate '" + id + "'");
  });
  return backend;
}

RawToolResult ReplayBackend::evaluate(const Problem&, const Candidate& candidate) const {
  auto it = results_.find(candidate.id);
  if (it == results_.end()) throw BackendError("no recorded result for candidate '" + candidate.id + "'");
  return it->second;
}

std::vector<EvalRecord> evaluate_all(const std::vector<Problem>& problems,
                                     const std::vector<Candidate>& candidates,
                                     const EvaluationBackend& backend, Exec exec) {
  std::map<std::string, const Problem*> by_id;
  for (const auto& p : problems) by_id.emplace(p.id, &p);

  std::vector<const Candidate*> order;
  order.reserve(candidates.size());
  for (const auto& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const Candidate* a, const Candidate* b) { return a->id < b->id; });

  const auto count = static_cast<long>(order.size());
  std::vector<EvalRecord> out(order.size());
  std::vector<std::exception_ptr> errors(order.size());

  auto run_one = [&](long i) {
    const Candidate& cand = *order[i];
    try {
      auto pit = by_id.find(cand.problem_id);
      if (pit == by_id.end())
        throw BackendError("candidate '" + cand.id + "' references unknown problem '" + cand.problem_id + "'");
      auto raw = backend.evaluate(*pit->second, cand);
      raw.candidate_id = cand.id;
      out[i] = to_eval_record(raw);
    } catch (const BackendError&) {
      errors[i] = std::current_exception();
    } catch (const std::exception& e) {
      errors[i] = std::make_exception_ptr(BackendError("backend failed on candidate '" + cand.id + "': " + e.what()));
    }
  };

  if (exec == Exec::parallel && backend.reentrant()) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) run_one(i);
  } else {
    for (long i = 0; i < count; ++i) run_one(i);
  }

  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

}  // namespace prefopt
