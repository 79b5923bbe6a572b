#pragma once

#include <span>
#include <vector>

#include "judgeforge/core/records.hpp"
#include "judgeforge/core/rng.hpp"

namespace judgeforge::loss {

// Per-target-token log-probabilities of one sequence. Nonempty, finite, <= 0.
class LogprobSeq {
 public:
  explicit LogprobSeq(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const LogprobSeq&, const LogprobSeq&) = default;

 private:
  std::vector<double> values_;
};

// Policy and reference log-probabilities of a chosen/rejected judgment pair.
struct PreferencePairLogprobs {
  PreferencePairLogprobs(LogprobSeq policy_chosen, LogprobSeq policy_rejected, LogprobSeq ref_chosen,
                         LogprobSeq ref_rejected);

  LogprobSeq policy_chosen;
  LogprobSeq policy_rejected;
  LogprobSeq ref_chosen;
  LogprobSeq ref_rejected;

  friend bool operator==(const PreferencePairLogprobs&, const PreferencePairLogprobs&) = default;
};

struct LossConfig {
  double alpha = 0.2;  // NLL weight
  double beta = 0.1;   // DPO temperature
  // Divide each chosen sequence's NLL by its token count. Off by default.
  bool length_normalized_nll = false;

  void validate() const;
};

// log(1 + e^x) without overflow.
double softplus(double x);
double sigmoid(double x);

double seq_logprob(const LogprobSeq& s);

// Batch mean of -log P(sequence).
double sft_loss(std::span<const LogprobSeq> batch);

// (policy_c - ref_c) - (policy_r - ref_r), with sequence log-probabilities.
double margin(const PreferencePairLogprobs& pair);

// Batch mean of -log sigmoid(beta * margin).
double dpo_loss(std::span<const PreferencePairLogprobs> batch, double beta);

// Batch mean of -log P_policy(chosen).
double nll_loss(std::span<const PreferencePairLogprobs> batch, bool length_normalized = false);

double total_loss(std::span<const PreferencePairLogprobs> batch, const LossConfig& config = {});

struct PairGradient {
  std::vector<double> policy_chosen;
  std::vector<double> policy_rejected;
};

// d total_loss / d(policy token logprob); reference values are constants.
std::vector<PairGradient> analytic_grad(std::span<const PreferencePairLogprobs> batch,
                                        const LossConfig& config = {});

// Max over policy coordinates of |analytic - numeric| / max(1e-8, |numeric|)
// with central differences of total_loss. eps must be > 0.
double grad_check(std::span<const PreferencePairLogprobs> batch, const LossConfig& config = {},
                  double eps = 1e-5);

// Seeded synthetic batch: policy logprobs in [-2, 0), reference = policy
// plus N(0, 0.5)-ish jitter clipped to <= 0.
std::vector<PreferencePairLogprobs> synthetic_batch(Rng& rng, std::size_t max_pairs = 4,
                                                    std::size_t max_len = 12);

struct LossReport {
  std::size_t pairs = 0;
  double dpo = 0.0;
  double nll = 0.0;
  double total = 0.0;
  double max_grad_rel_error = 0.0;

  Json to_json() const;
};

LossReport loss_report(std::span<const PreferencePairLogprobs> batch, const LossConfig& config,
                       double eps = 1e-5);

}  // namespace judgeforge::loss

namespace judgeforge {
// {"policy_chosen":[...], "policy_rejected":[...], "ref_chosen":[...], "ref_rejected":[...]}
template <>
struct RecordSchema<loss::PreferencePairLogprobs> {
  static constexpr const char* name = "logprob_pair";
  static Json encode(const loss::PreferencePairLogprobs& r);
  static loss::PreferencePairLogprobs decode(const Json& j);
};
}  // namespace judgeforge
