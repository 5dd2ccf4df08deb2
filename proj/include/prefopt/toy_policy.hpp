#pragma once

// Desk-scale stand-in for a language-model policy: one softmax row of
// parameters per context, tokens drawn independently from that row. It is
// just rich enough to differentiate the preference loss analytically and
// check it against finite differences.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefopt/exec.hpp"
#include "prefopt/loss.hpp"

namespace prefopt {

class ToyPolicy {
 public:
  /// Zero-initialized (uniform) policy. Throws DomainError on a zero size.
  ToyPolicy(std::size_t contexts, std::size_t vocab);
  ToyPolicy(std::size_t contexts, std::size_t vocab, std::vector<double> theta);

  /// Uniform draws in [lo, hi] from a seeded mt19937_64.
  static ToyPolicy random(std::size_t contexts, std::size_t vocab, std::uint64_t seed, double lo = -1.0,
                          double hi = 1.0);

  std::size_t contexts() const { return contexts_; }
  std::size_t vocab() const { return vocab_; }
  std::span<const double> theta() const { return theta_; }
  std::span<double> theta() { return theta_; }
  double& at(std::size_t context, std::size_t token) { return theta_[context * vocab_ + token]; }
  double at(std::size_t context, std::size_t token) const { return theta_[context * vocab_ + token]; }

  /// Stable log-softmax of one parameter row. Throws DomainError when out of range.
  std::vector<double> log_probs(std::size_t context) const;

 private:
  std::size_t contexts_;
  std::size_t vocab_;
  std::vector<double> theta_;  // row-major [context][token]
};

/// Sum (or mean) over tokens of log softmax(theta[context])[token].
/// Throws DomainError on an out-of-range id or an empty token list.
double toy_sequence_logprob(const ToyPolicy& policy, std::size_t context, std::span<const std::size_t> tokens,
                            Reduction reduction = Reduction::sum);

/// Adds scale * d(toy_sequence_logprob)/d(theta) into `grad` (sized like theta).
void accumulate_logprob_grad(const ToyPolicy& policy, std::size_t context, std::span<const std::size_t> tokens,
                             double scale, std::span<double> grad, Reduction reduction = Reduction::sum);

struct ToyPair {
  std::string pair_id;
  std::size_t context = 0;
  std::vector<std::size_t> chosen_tokens;
  std::vector<std::size_t> rejected_tokens;
  std::optional<Gas> gas_chosen;
  std::optional<Gas> gas_rejected;
  bool safe_chosen = false;
  bool safe_rejected = false;
};

LossInput make_loss_input(const ToyPolicy& policy, const ToyPolicy& reference, const ToyPair& pair,
                          Reduction reduction = Reduction::sum);

/// Mean l_total over the batch, with the policy's log-probabilities live and
/// the reference's frozen.
double batch_objective(const ToyPolicy& policy, const ToyPolicy& reference, std::span<const ToyPair> pairs,
                       const LossParams& params, Reduction reduction = Reduction::sum);

/// Closed-form gradient of batch_objective. Rewards do not depend on theta,
/// so this is the gradient of the DPO term alone.
std::vector<double> analytic_gradient(const ToyPolicy& policy, const ToyPolicy& reference,
                                      std::span<const ToyPair> pairs, const LossParams& params,
                                      Reduction reduction = Reduction::sum);

/// Central differences (f(theta+h e_i) - f(theta-h e_i)) / 2h per coordinate.
/// Parallel over coordinates; each coordinate's evaluation is serial, so the
/// result does not depend on `exec`.
std::vector<double> finite_difference_gradient(const ToyPolicy& policy, const ToyPolicy& reference,
                                               std::span<const ToyPair> pairs, const LossParams& params, double h,
                                               Exec exec = Exec::parallel, Reduction reduction = Reduction::sum);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
  bool pass = false;
};

/// Relative error per coordinate is |a - f| / max(1, |a|, |f|), which falls
/// back to absolute error for small gradients. Throws DomainError unless
/// h > 0 and tol > 0.
GradCheckReport grad_check(const ToyPolicy& policy, const ToyPolicy& reference, std::span<const ToyPair> pairs,
                           const LossParams& params, double h, double tol, Exec exec = Exec::parallel);

}  // namespace prefopt
