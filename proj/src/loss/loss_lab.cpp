#include "judgeforge/loss/loss_lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace judgeforge::loss {

namespace {

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;  // left-to-right
  return s;
}

// Unvalidated view used by grad_check, which perturbs values past 0.
struct RawPair {
  std::vector<double> pc, pr, rc, rr;
};

RawPair to_raw(const PreferencePairLogprobs& p) {
  auto vec = [](const LogprobSeq& s) { return std::vector<double>(s.values().begin(), s.values().end()); };
  return {vec(p.policy_chosen), vec(p.policy_rejected), vec(p.ref_chosen), vec(p.ref_rejected)};
}

double raw_margin(const RawPair& p) { return (sum(p.pc) - sum(p.rc)) - (sum(p.pr) - sum(p.rr)); }

double raw_total(const std::vector<RawPair>& batch, const LossConfig& cfg) {
  double dpo = 0.0, nll = 0.0;
  for (const auto& p : batch) {
    dpo += softplus(-cfg.beta * raw_margin(p));
    const double n = -sum(p.pc);
    nll += cfg.length_normalized_nll ? n / static_cast<double>(p.pc.size()) : n;
  }
  const double b = static_cast<double>(batch.size());
  return dpo / b + cfg.alpha * (nll / b);
}

template <class T>
void require_nonempty(std::span<const T> batch, const char* what) {
  if (batch.empty()) throw std::invalid_argument(std::string(what) + ": empty batch");
}

}  // namespace

LogprobSeq::LogprobSeq(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("LogprobSeq: empty sequence");
  for (double v : values_) {
    if (!std::isfinite(v) || v > 0.0) {
      throw std::invalid_argument("LogprobSeq: values must be finite and <= 0");
    }
  }
}

PreferencePairLogprobs::PreferencePairLogprobs(LogprobSeq pc, LogprobSeq pr, LogprobSeq rc, LogprobSeq rr)
    : policy_chosen(std::move(pc)),
      policy_rejected(std::move(pr)),
      ref_chosen(std::move(rc)),
      ref_rejected(std::move(rr)) {
  if (policy_chosen.size() != ref_chosen.size()) {
    throw std::invalid_argument("PreferencePairLogprobs: chosen policy/reference lengths differ");
  }
  if (policy_rejected.size() != ref_rejected.size()) {
    throw std::invalid_argument("PreferencePairLogprobs: rejected policy/reference lengths differ");
  }
}

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("LossConfig: alpha must be >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("LossConfig: beta must be > 0");
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double seq_logprob(const LogprobSeq& s) { return sum(s.values()); }

double sft_loss(std::span<const LogprobSeq> batch) {
  require_nonempty(batch, "sft_loss");
  double total = 0.0;
  for (const auto& s : batch) total += -seq_logprob(s);
  return total / static_cast<double>(batch.size());
}

double margin(const PreferencePairLogprobs& p) {
  return (seq_logprob(p.policy_chosen) - seq_logprob(p.ref_chosen)) -
         (seq_logprob(p.policy_rejected) - seq_logprob(p.ref_rejected));
}

double dpo_loss(std::span<const PreferencePairLogprobs> batch, double beta) {
  require_nonempty(batch, "dpo_loss");
  if (!(beta > 0.0)) throw std::invalid_argument("dpo_loss: beta must be > 0");
  double total = 0.0;
  for (const auto& p : batch) total += softplus(-beta * margin(p));
  return total / static_cast<double>(batch.size());
}

double nll_loss(std::span<const PreferencePairLogprobs> batch, bool length_normalized) {
  require_nonempty(batch, "nll_loss");
  double total = 0.0;
  for (const auto& p : batch) {
    const double n = -seq_logprob(p.policy_chosen);
    total += length_normalized ? n / static_cast<double>(p.policy_chosen.size()) : n;
  }
  return total / static_cast<double>(batch.size());
}

double total_loss(std::span<const PreferencePairLogprobs> batch, const LossConfig& config) {
  config.validate();
  return dpo_loss(batch, config.beta) + config.alpha * nll_loss(batch, config.length_normalized_nll);
}

std::vector<PairGradient> analytic_grad(std::span<const PreferencePairLogprobs> batch,
                                        const LossConfig& config) {
  require_nonempty(batch, "analytic_grad");
  config.validate();
  const double b = static_cast<double>(batch.size());
  std::vector<PairGradient> out;
  out.reserve(batch.size());
  for (const auto& p : batch) {
    // d/dx softplus(-beta x) = -beta * sigmoid(-beta x) = -beta (1 - s)
    const double one_minus_s = sigmoid(-config.beta * margin(p));
    const double nll_weight =
        config.length_normalized_nll ? config.alpha / static_cast<double>(p.policy_chosen.size()) : config.alpha;
    PairGradient g;
    g.policy_chosen.assign(p.policy_chosen.size(), (-config.beta * one_minus_s - nll_weight) / b);
    g.policy_rejected.assign(p.policy_rejected.size(), (config.beta * one_minus_s) / b);
    out.push_back(std::move(g));
  }
  return out;
}

double grad_check(std::span<const PreferencePairLogprobs> batch, const LossConfig& config, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("grad_check: eps must be > 0");
  const auto analytic = analytic_grad(batch, config);
  std::vector<RawPair> raw;
  raw.reserve(batch.size());
  for (const auto& p : batch) raw.push_back(to_raw(p));

  double worst = 0.0;
  auto check = [&](double& coord, double expected) {
    const double saved = coord;
    coord = saved + eps;
    const double up = raw_total(raw, config);
    coord = saved - eps;
    const double down = raw_total(raw, config);
    coord = saved;
    const double numeric = (up - down) / (2.0 * eps);
    worst = std::max(worst, std::abs(expected - numeric) / std::max(1e-8, std::abs(numeric)));
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (std::size_t t = 0; t < raw[i].pc.size(); ++t) check(raw[i].pc[t], analytic[i].policy_chosen[t]);
    for (std::size_t t = 0; t < raw[i].pr.size(); ++t) check(raw[i].pr[t], analytic[i].policy_rejected[t]);
  }
  return worst;
}

std::vector<PreferencePairLogprobs> synthetic_batch(Rng& rng, std::size_t max_pairs, std::size_t max_len) {
  if (max_pairs == 0 || max_len == 0) throw std::invalid_argument("synthetic_batch: sizes must be positive");
  const std::size_t pairs = 1 + static_cast<std::size_t>(rng.below(max_pairs));
  auto policy_seq = [&](std::size_t len) {
    std::vector<double> v(len);
    for (double& x : v) x = -2.0 * rng.uniform();
    return v;
  };
  auto jitter = [&](const std::vector<double>& base) {
    std::vector<double> v(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      // Sum of two uniforms: triangular on [-0.5, 0.5].
      const double noise = (rng.uniform() + rng.uniform() - 1.0) * 0.5;
      v[i] = std::min(0.0, base[i] + noise);
    }
    return v;
  };
  std::vector<PreferencePairLogprobs> batch;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t lc = 1 + static_cast<std::size_t>(rng.below(max_len));
    const std::size_t lr = 1 + static_cast<std::size_t>(rng.below(max_len));
    auto pc = policy_seq(lc);
    auto pr = policy_seq(lr);
    auto rc = jitter(pc);
    auto rr = jitter(pr);
    batch.emplace_back(LogprobSeq(std::move(pc)), LogprobSeq(std::move(pr)), LogprobSeq(std::move(rc)),
                       LogprobSeq(std::move(rr)));
  }
  return batch;
}

Json LossReport::to_json() const {
  return Json{{"pairs", pairs},
              {"dpo_loss", dpo},
              {"nll_loss", nll},
              {"total_loss", total},
              {"max_grad_rel_error", max_grad_rel_error}};
}

LossReport loss_report(std::span<const PreferencePairLogprobs> batch, const LossConfig& config, double eps) {
  LossReport r;
  r.pairs = batch.size();
  r.dpo = dpo_loss(batch, config.beta);
  r.nll = nll_loss(batch, config.length_normalized_nll);
  r.total = total_loss(batch, config);
  r.max_grad_rel_error = grad_check(batch, config, eps);
  return r;
}

}  // namespace judgeforge::loss

namespace judgeforge {

Json RecordSchema<loss::PreferencePairLogprobs>::encode(const loss::PreferencePairLogprobs& r) {
  auto arr = [](const loss::LogprobSeq& s) { return Json(std::vector<double>(s.values().begin(), s.values().end())); };
  return Json{{"policy_chosen", arr(r.policy_chosen)},
              {"policy_rejected", arr(r.policy_rejected)},
              {"ref_chosen", arr(r.ref_chosen)},
              {"ref_rejected", arr(r.ref_rejected)}};
}

loss::PreferencePairLogprobs RecordSchema<loss::PreferencePairLogprobs>::decode(const Json& j) {
  auto seq = [&](const char* field) {
    const Json& v = json_field::require(j, field);
    if (!v.is_array()) throw SchemaError(field, "expected array of numbers");
    std::vector<double> out;
    for (const Json& x : v) {
      if (!x.is_number()) throw SchemaError(field, "expected array of numbers");
      out.push_back(x.get<double>());
    }
    try {
      return loss::LogprobSeq(std::move(out));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(field, e.what());
    }
  };
  auto pc = seq("policy_chosen");
  auto pr = seq("policy_rejected");
  auto rc = seq("ref_chosen");
  auto rr = seq("ref_rejected");
  try {
    return loss::PreferencePairLogprobs(std::move(pc), std::move(pr), std::move(rc), std::move(rr));
  } catch (const std::invalid_argument& e) {
    throw SchemaError("ref_chosen", e.what());
  }
}

}  // namespace judgeforge
