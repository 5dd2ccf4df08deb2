#pragma once

// Preference losses: SFT cross-entropy, the sigmoid DPO loss, gas and
// security rewards, and their combination
//
//   r_extra = alpha * r_g + beta * r_v
//   l_total = l_dpo + lambda * (-r_extra)
//
// Rewards depend on executed artifacts only, so they are constants with
// respect to policy parameters.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefopt/config.hpp"
#include "prefopt/exec.hpp"
#include "prefopt/model.hpp"

namespace prefopt {

enum class Reduction { sum, mean };

/// -sum(log p), or that divided by the token count. Throws DomainError on an
/// empty list or a positive log-probability.
double sft_loss(std::span<const double> token_logps, Reduction reduction = Reduction::sum);

struct LossInput {
  std::string pair_id;
  double policy_chosen = 0.0;  // total sequence log-probabilities, nats
  double policy_rejected = 0.0;
  double ref_chosen = 0.0;
  double ref_rejected = 0.0;
  std::optional<Gas> gas_chosen;
  std::optional<Gas> gas_rejected;
  bool safe_chosen = false;
  bool safe_rejected = false;
};

struct LossParams {
  double alpha = 1.0;
  double beta = 1.0;
  double lambda = 0.5;
  double tau = 0.1;
  GasRewardMode gas_mode = GasRewardMode::relative_clipped;

  static LossParams from(const Config& cfg);
};

/// Numerically stable log(1 + exp(x)).
double softplus(double x);

/// Chosen-over-rejected log-ratio margin, before temperature.
double preference_margin(const LossInput& in);

/// -log sigmoid(tau * margin). Throws DomainError unless tau > 0.
double dpo_loss(const LossInput& in, double tau);

/// raw: -(gas_chosen - gas_rejected).
/// relative_clipped: clamp((gas_rejected - gas_chosen) / max(gas_rejected, gas_chosen, 1), -1, 1).
/// Both absent gives 0; exactly one present throws DomainError.
double gas_reward(std::optional<Gas> gas_chosen, std::optional<Gas> gas_rejected, GasRewardMode mode);

int security_reward(bool safe_chosen, bool safe_rejected);

struct LossBreakdown {
  double l_dpo = 0.0;
  double r_g = 0.0;
  double r_v = 0.0;
  double r_extra = 0.0;
  double l_total = 0.0;
  GasRewardMode gas_mode = GasRewardMode::relative_clipped;
};

LossBreakdown total_loss(const LossInput& in, const LossParams& params);

/// One breakdown per input, same order.
std::vector<LossBreakdown> total_loss_batch(std::span<const LossInput> inputs, const LossParams& params,
                                            Exec exec = Exec::parallel);

struct BatchSummary {
  std::size_t count = 0;
  LossBreakdown sum;
  LossBreakdown mean;
};

/// Sums in input order; callers sort by pair_id first for reproducible folds.
BatchSummary summarize(std::span<const LossBreakdown> rows);

std::vector<LossInput> read_loss_inputs(const std::filesystem::path& path);

/// One line per pair with its breakdown, then a final `{"summary": ...}` line
/// carrying batch sums and means.
std::string loss_report_jsonl(std::span<const LossInput> inputs, std::span<const LossBreakdown> rows,
                              const LossParams& params);

}  // namespace prefopt
