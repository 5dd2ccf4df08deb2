#include "prefopt/loss.hpp"

#include <algorithm>
#include <cmath>

#include "prefopt/errors.hpp"
#include "prefopt/io.hpp"

namespace prefopt {

namespace fs = std::filesystem;

double sft_loss(std::span<const double> token_logps, Reduction reduction) {
  if (token_logps.empty()) throw DomainError("sft_loss: empty token list");
  double nll = 0.0;
  for (double lp : token_logps) {
    if (!(lp <= 0.0)) throw DomainError("sft_loss: log-probability must be <= 0");
    nll -= lp;
  }
  return reduction == Reduction::mean ? nll / static_cast<double>(token_logps.size()) : nll;
}

LossParams LossParams::from(const Config& cfg) {
  return {cfg.alpha, cfg.beta, cfg.lambda, cfg.dpo_temperature, cfg.gas_reward_mode};
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double preference_margin(const LossInput& in) {
  return (in.policy_chosen - in.ref_chosen) - (in.policy_rejected - in.ref_rejected);
}

double dpo_loss(const LossInput& in, double tau) {
  if (!(tau > 0.0)) throw DomainError("dpo_loss: temperature must be > 0");
  return softplus(-tau * preference_margin(in));
}

double gas_reward(std::optional<Gas> gas_chosen, std::optional<Gas> gas_rejected, GasRewardMode mode) {
  if (gas_chosen.has_value() != gas_rejected.has_value())
    throw DomainError("gas_reward: gas must be present for both candidates or for neither");
  if (!gas_chosen) return 0.0;
  const auto chosen = static_cast<double>(*gas_chosen);
  const auto rejected = static_cast<double>(*gas_rejected);
  if (mode == GasRewardMode::raw) return -(chosen - rejected);
  const double scale = std::max({rejected, chosen, 1.0});
  return std::clamp((rejected - chosen) / scale, -1.0, 1.0);
}

int security_reward(bool safe_chosen, bool safe_rejected) {
  return (safe_chosen ? 1 : 0) - (safe_rejected ? 1 : 0);
}

LossBreakdown total_loss(const LossInput& in, const LossParams& params) {
  LossBreakdown b;
  b.gas_mode = params.gas_mode;
  b.l_dpo = dpo_loss(in, params.tau);
  b.r_g = gas_reward(in.gas_chosen, in.gas_rejected, params.gas_mode);
  b.r_v = security_reward(in.safe_chosen, in.safe_rejected);
  b.r_extra = params.alpha * b.r_g + params.beta * b.r_v;
  b.l_total = b.l_dpo + params.lambda * (-b.r_extra);
  return b;
}

std::vector<LossBreakdown> total_loss_batch(std::span<const LossInput> inputs, const LossParams& params, Exec exec) {
  if (!(params.tau > 0.0)) throw DomainError("dpo_loss: temperature must be > 0");
  std::vector<LossBreakdown> out(inputs.size());
  const auto n = static_cast<long>(inputs.size());
  if (exec == Exec::parallel) {
    // Per-pair gas errors are checked up front so no exception escapes the region.
    for (const auto& in : inputs) {
      if (in.gas_chosen.has_value() != in.gas_rejected.has_value())
        throw DomainError("pair '" + in.pair_id + "': gas must be present for both candidates or for neither");
    }
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[i] = total_loss(inputs[i], params);
  } else {
    for (long i = 0; i < n; ++i) out[i] = total_loss(inputs[i], params);
  }
  return out;
}

BatchSummary summarize(std::span<const LossBreakdown> rows) {
  BatchSummary s;
  s.count = rows.size();
  for (const auto& r : rows) {
    s.sum.l_dpo += r.l_dpo;
    s.sum.r_g += r.r_g;
    s.sum.r_v += r.r_v;
    s.sum.r_extra += r.r_extra;
    s.sum.l_total += r.l_total;
  }
  if (s.count > 0) {
    const auto n = static_cast<double>(s.count);
    s.mean = {s.sum.l_dpo / n, s.sum.r_g / n, s.sum.r_v / n, s.sum.r_extra / n, s.sum.l_total / n, {}};
  }
  if (!rows.empty()) s.sum.gas_mode = s.mean.gas_mode = rows.front().gas_mode;
  return s;
}

std::vector<LossInput> read_loss_inputs(const fs::path& path) {
  std::vector<LossInput> out;
  const auto name = path.string();
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    JsonlCursor cur{obj, name, line};
    LossInput in;
    in.pair_id = cur.str("pair_id");
    auto it = obj.find("logp");
    if (it == obj.end() || !it->is_object()) cur.fail("missing object field 'logp'");
    JsonlCursor lp{*it, name, line};
    in.policy_chosen = lp.number("policy_chosen");
    in.policy_rejected = lp.number("policy_rejected");
    in.ref_chosen = lp.number("ref_chosen");
    in.ref_rejected = lp.number("ref_rejected");
    in.gas_chosen = cur.gas("gas_chosen");
    in.gas_rejected = cur.gas("gas_rejected");
    if (in.gas_chosen.has_value() != in.gas_rejected.has_value())
      cur.fail("gas_chosen and gas_rejected must be present together");
    in.safe_chosen = cur.boolean("safe_chosen");
    in.safe_rejected = cur.boolean("safe_rejected");
    out.push_back(std::move(in));
  });
  return out;
}

namespace {

OrderedJson terms(const LossBreakdown& b) {
  OrderedJson j;
  j["l_dpo"] = b.l_dpo;
  j["r_g"] = b.r_g;
  j["r_v"] = b.r_v;
  j["r_extra"] = b.r_extra;
  j["l_total"] = b.l_total;
  return j;
}

}  // namespace

std::string loss_report_jsonl(std::span<const LossInput> inputs, std::span<const LossBreakdown> rows,
                              const LossParams& params) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    OrderedJson j;
    j["pair_id"] = inputs[i].pair_id;
    const auto t = terms(rows[i]);
    for (const auto& [k, v] : t.items()) j[k] = v;
    j["gas_reward_mode"] = std::string(to_string(rows[i].gas_mode));
    out += j.dump();
    out += '\n';
  }
  const auto s = summarize(rows);
  OrderedJson summary;
  summary["count"] = s.count;
  summary["mean"] = terms(s.mean);
  summary["sum"] = terms(s.sum);
  OrderedJson p;
  p["alpha"] = params.alpha;
  p["beta"] = params.beta;
  p["lambda"] = params.lambda;
  p["dpo_temperature"] = params.tau;
  p["gas_reward_mode"] = std::string(to_string(params.gas_mode));
  summary["params"] = std::move(p);
  OrderedJson line;
  line["summary"] = std::move(summary);
  out += line.dump();
  out += '\n';
  return out;
}

}  // namespace prefopt
