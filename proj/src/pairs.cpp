#include "prefopt/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "prefopt/errors.hpp"
#include "prefopt/harness.hpp"
#include "prefopt/io.hpp"

namespace prefopt {

namespace fs = std::filesystem;

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::correctness: return "correctness";
    case Objective::gas: return "gas";
    case Objective::security: return "security";
  }
  return "correctness";
}

std::optional<Objective> parse_objective(std::string_view s) {
  if (s == "correctness") return Objective::correctness;
  if (s == "gas") return Objective::gas;
  if (s == "security") return Objective::security;
  return std::nullopt;
}

std::optional<Objective> objective_for(Category c) {
  switch (c) {
    case Category::correctness: return Objective::correctness;
    case Category::gas: return Objective::gas;
    case Category::security: return Objective::security;
    case Category::unassigned: return std::nullopt;
  }
  return std::nullopt;
}

void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const std::uint64_t r = gen();
      if (r >= threshold) return r % bound;
    }
  };
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(below(i));
    std::swap(items[i - 1], items[j]);
  }
}

SeedPartition partition_seeds(std::vector<std::string> problem_ids, std::array<double, 3> proportions,
                              std::uint64_t rng_seed) {
  double total = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("partition proportions must each lie in [0, 1]");
    total += p;
  }
  if (total > 1.0 + 1e-12) throw DomainError("partition proportions must sum to at most 1");

  std::sort(problem_ids.begin(), problem_ids.end());
  problem_ids.erase(std::unique(problem_ids.begin(), problem_ids.end()), problem_ids.end());
  seeded_shuffle(problem_ids, rng_seed);

  const auto n = problem_ids.size();
  constexpr Category order[] = {Category::correctness, Category::security, Category::gas};
  std::array<std::size_t, 3> end{};
  double cum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    cum += proportions[i];
    const auto b = static_cast<std::size_t>(std::floor(cum * static_cast<double>(n) + 1e-9));
    end[i] = std::min(b, n);
  }

  SeedPartition out;
  out.proportions = proportions;
  out.rng_seed = rng_seed;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = begin; j < end[i]; ++j) out.assignment.emplace(problem_ids[j], order[i]);
    begin = std::max(begin, end[i]);
  }
  for (std::size_t j = begin; j < n; ++j) out.assignment.emplace(problem_ids[j], Category::unassigned);
  return out;
}

namespace {

bool is_safe(const EvalRecord& e, Severity threshold) { return e.compiled && classify_secure(e.findings, threshold); }

PreferencePair make_pair(const Problem& problem, Objective objective, const ScoredCandidate& chosen,
                         const ScoredCandidate& rejected, Severity threshold) {
  PreferencePair p;
  p.problem_id = problem.id;
  p.objective = objective;
  p.chosen_id = chosen.candidate->id;
  p.rejected_id = rejected.candidate->id;
  p.pair_id = problem.id + "/" + std::string(to_string(objective)) + "/" + p.chosen_id + "/" + p.rejected_id;
  p.gas_chosen = chosen.eval->gas;
  p.gas_rejected = rejected.eval->gas;
  p.safe_chosen = is_safe(*chosen.eval, threshold);
  p.safe_rejected = is_safe(*rejected.eval, threshold);
  return p;
}

}  // namespace

std::vector<PreferencePair> build_pairs(const Problem& problem, std::span<const ScoredCandidate> candidates,
                                        const std::map<std::string, double>& scores, Objective objective,
                                        double epsilon, Severity threshold) {
  std::vector<ScoredCandidate> pool;
  for (const auto& sc : candidates) {
    if (sc.candidate->problem_id == problem.id) pool.push_back(sc);
  }
  std::sort(pool.begin(), pool.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.candidate->id < b.candidate->id; });

  std::vector<PreferencePair> out;
  switch (objective) {
    case Objective::correctness: {
      auto score_of = [&](const ScoredCandidate& sc) {
        auto it = scores.find(sc.candidate->id);
        if (it == scores.end()) throw DomainError("no quality score for candidate '" + sc.candidate->id + "'");
        return it->second;
      };
      for (const auto& chosen : pool) {
        if (!chosen.eval->passed) continue;
        for (const auto& rejected : pool) {
          if (rejected.eval->passed || !rejected.eval->compiled) continue;
          if (score_of(chosen) - score_of(rejected) > epsilon)
            out.push_back(make_pair(problem, objective, chosen, rejected, threshold));
        }
      }
      break;
    }
    case Objective::gas:
      for (const auto& chosen : pool) {
        if (!chosen.eval->passed || !chosen.eval->gas) continue;
        for (const auto& rejected : pool) {
          if (!rejected.eval->passed || !rejected.eval->gas) continue;
          if (*chosen.eval->gas < *rejected.eval->gas)
            out.push_back(make_pair(problem, objective, chosen, rejected, threshold));
        }
      }
      break;
    case Objective::security:
      for (const auto& chosen : pool) {
        if (!is_safe(*chosen.eval, threshold)) continue;
        for (const auto& rejected : pool) {
          if (!rejected.eval->compiled || is_safe(*rejected.eval, threshold)) continue;
          out.push_back(make_pair(problem, objective, chosen, rejected, threshold));
        }
      }
      break;
  }
  // The pool is id-sorted and the loops nest chosen-outer, so `out` is
  // already in (chosen_id, rejected_id) order.
  return out;
}

std::vector<PreferencePair> subsample_pairs(const std::vector<PreferencePair>& pairs, double fraction,
                                            std::uint64_t rng_seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("subsample fraction must lie in (0, 1]");
  if (fraction == 1.0) return pairs;

  std::map<Objective, std::vector<std::string>> groups;
  for (const auto& p : pairs) groups[p.objective].push_back(p.pair_id);

  std::map<std::string, bool> keep;
  for (auto& [objective, ids] : groups) {
    std::sort(ids.begin(), ids.end());
    const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(ids.size()) + 0.5));
    seeded_shuffle(ids, rng_seed + static_cast<std::uint64_t>(objective));
    for (std::size_t i = 0; i < take && i < ids.size(); ++i) keep[ids[i]] = true;
  }

  std::vector<PreferencePair> out;
  for (const auto& p : pairs) {
    if (keep.contains(p.pair_id)) out.push_back(p);
  }
  return out;
}

std::optional<std::string> check_pair(const PreferencePair& pair, const std::map<std::string, const Candidate*>& cands,
                                      const std::map<std::string, const EvalRecord*>& evals) {
  if (pair.chosen_id == pair.rejected_id) return "chosen and rejected are the same candidate";
  for (const auto* id : {&pair.chosen_id, &pair.rejected_id}) {
    auto it = cands.find(*id);
    if (it == cands.end()) return "unknown candidate '" + *id + "'";
    if (it->second->problem_id != pair.problem_id) return "candidate '" + *id + "' belongs to another problem";
  }
  switch (pair.objective) {
    case Objective::gas:
      if (!pair.gas_chosen || !pair.gas_rejected) return "gas pair without both gas values";
      if (!(*pair.gas_chosen < *pair.gas_rejected)) return "gas pair where chosen does not use less gas";
      break;
    case Objective::security:
      if (!pair.safe_chosen || pair.safe_rejected) return "security pair must be safe over unsafe";
      break;
    case Objective::correctness: {
      auto c = evals.find(pair.chosen_id);
      auto r = evals.find(pair.rejected_id);
      if (c == evals.end() || r == evals.end()) return "correctness pair without eval records";
      if (!c->second->passed || r->second->passed) return "correctness pair must be passing over non-passing";
      if (!r->second->compiled) return "correctness pair whose rejected candidate did not compile";
      break;
    }
  }
  return std::nullopt;
}

std::string pairs_to_jsonl(const std::vector<PreferencePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    OrderedJson j;
    j["pair_id"] = p.pair_id;
    j["problem_id"] = p.problem_id;
    j["objective"] = std::string(to_string(p.objective));
    j["chosen"] = p.chosen_id;
    j["rejected"] = p.rejected_id;
    if (p.gas_chosen) j["gas_chosen"] = *p.gas_chosen;
    if (p.gas_rejected) j["gas_rejected"] = *p.gas_rejected;
    j["safe_chosen"] = p.safe_chosen;
    j["safe_rejected"] = p.safe_rejected;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<PreferencePair> read_pairs(const fs::path& path) {
  std::vector<PreferencePair> out;
  const auto name = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    PreferencePair p;
    p.pair_id = cur.str("pair_id");
    p.problem_id = cur.str("problem_id");
    auto obj_text = cur.str("objective");
    auto objective = parse_objective(obj_text);
    if (!objective) cur.fail("unknown objective '" + obj_text + "'");
    p.objective = *objective;
    p.chosen_id = cur.str("chosen");
    p.rejected_id = cur.str("rejected");
    p.gas_chosen = cur.gas("gas_chosen");
    p.gas_rejected = cur.gas("gas_rejected");
    p.safe_chosen = cur.boolean("safe_chosen");
    p.safe_rejected = cur.boolean("safe_rejected");
    out.push_back(std::move(p));
  });
  return out;
}

std::string partition_to_jsonl(const SeedPartition& partition) {
  std::string out;
  for (const auto& [pid, cat] : partition.assignment) {
    OrderedJson j;
    j["problem_id"] = pid;
    j["category"] = std::string(to_string(cat));
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::map<std::string, Category> read_partition(const fs::path& path) {
  std::map<std::string, Category> out;
  const auto name = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    auto text = cur.str("category");
    auto cat = parse_category(text);
    if (!cat) cur.fail("unknown category '" + text + "'");
    auto pid = cur.str("problem_id");
    if (!out.emplace(pid, *cat).second) cur.fail("problem '" + pid + "' assigned twice");
  });
  return out;
}

}  // namespace prefopt
