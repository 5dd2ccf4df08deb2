#pragma once

// Multi-objective preference dataset construction: seed partitioning,
// chosen/rejected pairing per objective, and stratified subsampling.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefopt/model.hpp"
#include "prefopt/ranker.hpp"

namespace prefopt {

enum class Objective { correctness, gas, security };

std::string_view to_string(Objective o);
std::optional<Objective> parse_objective(std::string_view s);
std::optional<Objective> objective_for(Category c);

struct PreferencePair {
  std::string pair_id;
  std::string problem_id;
  Objective objective = Objective::correctness;
  std::string chosen_id;
  std::string rejected_id;
  std::optional<Gas> gas_chosen;
  std::optional<Gas> gas_rejected;
  bool safe_chosen = false;
  bool safe_rejected = false;

  bool operator==(const PreferencePair&) const = default;
};

struct SeedPartition {
  std::map<std::string, Category> assignment;
  std::array<double, 3> proportions{};  // (correctness, security, gas)
  std::uint64_t rng_seed = 0;
};

/// Deterministic Fisher-Yates over mt19937_64, with an unbiased bounded draw
/// that does not depend on the standard library's distributions.
void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed);

/// Sorts ids, shuffles by `rng_seed`, then slices contiguously into
/// correctness / security / gas at cumulative floor boundaries. Ids past the
/// last boundary are unassigned. Throws DomainError on a proportion outside
/// [0, 1] or a sum above 1.
SeedPartition partition_seeds(std::vector<std::string> problem_ids, std::array<double, 3> proportions,
                              std::uint64_t rng_seed);

/// A candidate together with its (implication-enforced) evaluation.
struct ScoredCandidate {
  const Candidate* candidate;
  const EvalRecord* eval;
};

/// Pairs for one problem and one objective, ordered by (chosen_id, rejected_id).
///  - correctness: passed vs compiled-but-failed, kept when the quality score
///    gap exceeds `epsilon`;
///  - gas: passing candidates with gas, lower gas preferred, equal gas skipped;
///  - security: compiled candidates, secure vs insecure under `threshold`.
/// Throws DomainError when a correctness candidate has no score.
std::vector<PreferencePair> build_pairs(const Problem& problem, std::span<const ScoredCandidate> candidates,
                                        const std::map<std::string, double>& scores, Objective objective,
                                        double epsilon, Severity threshold = Severity::high);

/// Stratified by objective: each group keeps round(fraction * size) pairs
/// chosen by a seeded shuffle; survivors keep their input order. Throws
/// DomainError for fraction outside (0, 1].
std::vector<PreferencePair> subsample_pairs(const std::vector<PreferencePair>& pairs, double fraction,
                                            std::uint64_t rng_seed);

/// Empty when the pair satisfies its objective's invariant, otherwise a
/// description of the first violation. `evals` is keyed by candidate id.
std::optional<std::string> check_pair(const PreferencePair& pair, const std::map<std::string, const Candidate*>& cands,
                                      const std::map<std::string, const EvalRecord*>& evals);

std::string pairs_to_jsonl(const std::vector<PreferencePair>& pairs);
std::vector<PreferencePair> read_pairs(const std::filesystem::path& path);

std::string partition_to_jsonl(const SeedPartition& partition);
std::map<std::string, Category> read_partition(const std::filesystem::path& path);

}  // namespace prefopt
