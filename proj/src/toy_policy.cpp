#include "prefopt/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "prefopt/errors.hpp"

namespace prefopt {

ToyPolicy::ToyPolicy(std::size_t contexts, std::size_t vocab)
    : ToyPolicy(contexts, vocab, std::vector<double>(contexts * vocab, 0.0)) {}

ToyPolicy::ToyPolicy(std::size_t contexts, std::size_t vocab, std::vector<double> theta)
    : contexts_(contexts), vocab_(vocab), theta_(std::move(theta)) {
  if (contexts_ == 0 || vocab_ == 0) throw DomainError("toy policy needs at least one context and one token");
  if (theta_.size() != contexts_ * vocab_) throw DomainError("toy policy parameter count does not match C*V");
}

ToyPolicy ToyPolicy::random(std::size_t contexts, std::size_t vocab, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 gen(seed);
  std::vector<double> theta(contexts * vocab);
  // Map the raw 53 high bits to [0, 1) directly so draws are platform-stable.
  for (auto& v : theta) v = lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return ToyPolicy(contexts, vocab, std::move(theta));
}

std::vector<double> ToyPolicy::log_probs(std::size_t context) const {
  if (context >= contexts_) throw DomainError("context id out of range");
  const double* row = theta_.data() + context * vocab_;
  const double mx = *std::max_element(row, row + vocab_);
  double z = 0.0;
  for (std::size_t v = 0; v < vocab_; ++v) z += std::exp(row[v] - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(vocab_);
  for (std::size_t v = 0; v < vocab_; ++v) out[v] = row[v] - lse;
  return out;
}

double toy_sequence_logprob(const ToyPolicy& policy, std::size_t context, std::span<const std::size_t> tokens,
                            Reduction reduction) {
  if (tokens.empty()) throw DomainError("token sequence must not be empty");
  const auto lp = policy.log_probs(context);
  double total = 0.0;
  for (auto tok : tokens) {
    if (tok >= policy.vocab()) throw DomainError("token id out of range");
    total += lp[tok];
  }
  return reduction == Reduction::mean ? total / static_cast<double>(tokens.size()) : total;
}

void accumulate_logprob_grad(const ToyPolicy& policy, std::size_t context, std::span<const std::size_t> tokens,
                             double scale, std::span<double> grad, Reduction reduction) {
  if (tokens.empty()) throw DomainError("token sequence must not be empty");
  const auto lp = policy.log_probs(context);
  const std::size_t V = policy.vocab();
  if (std::any_of(tokens.begin(), tokens.end(), [&](std::size_t t) { return t >= V; }))
    throw DomainError("token id out of range");
  if (reduction == Reduction::mean) scale /= static_cast<double>(tokens.size());
  double* row = grad.data() + context * V;
  // d/dtheta_v of log p_tok is [v == tok] - p_v.
  const auto count = static_cast<double>(tokens.size());
  for (std::size_t v = 0; v < V; ++v) row[v] -= scale * count * std::exp(lp[v]);
  for (auto tok : tokens) row[tok] += scale;
}

LossInput make_loss_input(const ToyPolicy& policy, const ToyPolicy& reference, const ToyPair& pair,
                          Reduction reduction) {
  LossInput in;
  in.pair_id = pair.pair_id;
  in.policy_chosen = toy_sequence_logprob(policy, pair.context, pair.chosen_tokens, reduction);
  in.policy_rejected = toy_sequence_logprob(policy, pair.context, pair.rejected_tokens, reduction);
  in.ref_chosen = toy_sequence_logprob(reference, pair.context, pair.chosen_tokens, reduction);
  in.ref_rejected = toy_sequence_logprob(reference, pair.context, pair.rejected_tokens, reduction);
  in.gas_chosen = pair.gas_chosen;
  in.gas_rejected = pair.gas_rejected;
  in.safe_chosen = pair.safe_chosen;
  in.safe_rejected = pair.safe_rejected;
  return in;
}

double batch_objective(const ToyPolicy& policy, const ToyPolicy& reference, std::span<const ToyPair> pairs,
                       const LossParams& params, Reduction reduction) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : pairs) total += total_loss(make_loss_input(policy, reference, p, reduction), params).l_total;
  return total / static_cast<double>(pairs.size());
}

std::vector<double> analytic_gradient(const ToyPolicy& policy, const ToyPolicy& reference,
                                      std::span<const ToyPair> pairs, const LossParams& params, Reduction reduction) {
  std::vector<double> grad(policy.theta().size(), 0.0);
  if (pairs.empty()) return grad;
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (const auto& p : pairs) {
    const auto in = make_loss_input(policy, reference, p, reduction);
    const double z = params.tau * preference_margin(in);
    // d softplus(-z)/dz = -sigmoid(-z)
    const double dl_dz = -1.0 / (1.0 + std::exp(z));
    const double coef = inv_n * dl_dz * params.tau;
    accumulate_logprob_grad(policy, p.context, p.chosen_tokens, coef, grad, reduction);
    accumulate_logprob_grad(policy, p.context, p.rejected_tokens, -coef, grad, reduction);
  }
  return grad;
}

std::vector<double> finite_difference_gradient(const ToyPolicy& policy, const ToyPolicy& reference,
                                               std::span<const ToyPair> pairs, const LossParams& params, double h,
                                               Exec exec, Reduction reduction) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be > 0");
  const auto n = static_cast<long>(policy.theta().size());
  std::vector<double> grad(n, 0.0);
  auto one = [&](ToyPolicy& probe, long i) {
    const double saved = probe.theta()[i];
    probe.theta()[i] = saved + h;
    const double up = batch_objective(probe, reference, pairs, params, reduction);
    probe.theta()[i] = saved - h;
    const double down = batch_objective(probe, reference, pairs, params, reduction);
    probe.theta()[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      ToyPolicy probe = policy;
#pragma omp for schedule(static)
      for (long i = 0; i < n; ++i) one(probe, i);
    }
  } else {
    ToyPolicy probe = policy;
    for (long i = 0; i < n; ++i) one(probe, i);
  }
  return grad;
}

GradCheckReport grad_check(const ToyPolicy& policy, const ToyPolicy& reference, std::span<const ToyPair> pairs,
                           const LossParams& params, double h, double tol, Exec exec) {
  if (!(tol > 0.0)) throw DomainError("grad_check tolerance must be > 0");
  const auto analytic = analytic_gradient(policy, reference, pairs, params);
  const auto numeric = finite_difference_gradient(policy, reference, pairs, params, h, exec);
  GradCheckReport report;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric[i])});
    const double rel = std::abs(analytic[i] - numeric[i]) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_coordinate = i;
    }
  }
  report.pass = report.max_rel_error < tol;
  return report;
}

}  // namespace prefopt
