#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "judgeforge/core/records.hpp"
#include "judgeforge/gateway/gateway.hpp"
#include "judgeforge/judgment/judgment.hpp"

namespace judgeforge::dpo {

// A hard instruction awaiting self-sampled judgments.
struct PoolItem {
  std::string id;
  JudgeInstruction instruction;
  Verdict ground_truth = Verdict::A;

  friend bool operator==(const PoolItem&, const PoolItem&) = default;
};

// to_dpo_pool items only, one per pair, using the forward instruction.
std::vector<PoolItem> pool_from_routed(std::span<const judgment::RoutedItem> routed);

struct SampleParams {
  std::string model;
  int k = 6;
  double temperature = 0.9;
  double top_p = 1.0;
  int max_tokens = 2048;
  std::uint64_t seed = 0;
};

struct CandidateSet {
  std::vector<Judgment> candidates;  // request order
  std::size_t requested = 0;
  bool partial = false;  // fewer than requested usable completions
};

// One n=k request when the provider supports n, otherwise k single requests
// with seeds seed, seed+1, ...
std::vector<gateway::CompletionRequest> candidate_requests(const gateway::Provider& provider,
                                                           const JudgeInstruction& instruction,
                                                           const SampleParams& params);

CandidateSet sample_candidates(gateway::Gateway& gw, const JudgeInstruction& instruction,
                               const SampleParams& params);

struct PairIndices {
  std::size_t chosen = 0;
  std::size_t rejected = 0;

  friend bool operator==(const PairIndices&, const PairIndices&) = default;
};

// First correct and first parseable-but-wrong candidate in sample order.
// Unparseable candidates are never used.
std::optional<PairIndices> select_pair(std::span<const Judgment> candidates, Verdict ground_truth);

// Correct x incorrect cross product in sample order, capped at limit.
std::vector<PairIndices> select_all_pairs(std::span<const Judgment> candidates, Verdict ground_truth,
                                          std::size_t limit);

std::optional<DpoRecord> filter_and_pair(const PoolItem& item, std::span<const Judgment> candidates);

struct YieldReport {
  std::size_t instructions_in = 0;
  std::size_t pairs_out = 0;
  std::size_t partial_samples = 0;
  std::map<std::string, std::size_t> exclusions;  // reason -> count

  std::string to_text() const;
};

struct SamplerOptions {
  SampleParams params;
  // Cross-product mode; default is one canonical pair per instruction.
  bool all_pairs = false;
  std::size_t max_pairs_per_instruction = 4;
};

struct SamplerResult {
  std::vector<DpoRecord> records;
  YieldReport report;
};

SamplerResult run_sampler(gateway::Gateway& gw, std::span<const PoolItem> pool,
                          const SamplerOptions& options);

}  // namespace judgeforge::dpo

namespace judgeforge {
template <>
struct RecordSchema<dpo::PoolItem> {
  static constexpr const char* name = "dpo_pool_item";
  static Json encode(const dpo::PoolItem& r);
  static dpo::PoolItem decode(const Json& j);
  static const std::string& key(const dpo::PoolItem& r) { return r.id; }
};
}  // namespace judgeforge
