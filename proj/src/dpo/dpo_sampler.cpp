#include "judgeforge/dpo/dpo_sampler.hpp"

#include <sstream>

namespace judgeforge::dpo {

namespace {

GenParams gen_params_of(const SampleParams& p, std::uint64_t seed) {
  GenParams g;
  g.model = p.model;
  g.temperature = p.temperature;
  g.top_p = p.top_p;
  g.max_tokens = p.max_tokens;
  g.seed = seed;
  return g;
}

DpoRecord make_record(std::string id, const PoolItem& item, const Judgment& chosen,
                      const Judgment& rejected) {
  DpoRecord r;
  r.id = std::move(id);
  r.kind = RecordKind::judge;
  r.instruction = item.instruction;
  r.chosen = chosen;
  r.rejected = rejected;
  return r;
}

std::string exclusion_reason(std::span<const Judgment> candidates, Verdict truth) {
  bool any_parseable = false, any_correct = false;
  for (const auto& c : candidates) {
    if (c.verdict == Verdict::unparseable) continue;
    any_parseable = true;
    any_correct = any_correct || c.verdict == truth;
  }
  if (candidates.empty()) return "no_candidates";
  if (!any_parseable) return "all_unparseable";
  if (!any_correct) return "no_correct";
  return "no_incorrect";
}

}  // namespace

std::vector<PoolItem> pool_from_routed(std::span<const judgment::RoutedItem> routed) {
  std::vector<PoolItem> pool;
  for (const auto& item : routed) {
    if (item.route != judgment::Route::to_dpo_pool) continue;
    pool.push_back({item.qa.id, item.outcome.forward_instruction,
                    chosen_position(item.outcome.forward_instruction.order)});
  }
  return pool;
}

std::vector<gateway::CompletionRequest> candidate_requests(const gateway::Provider& provider,
                                                           const JudgeInstruction& instruction,
                                                           const SampleParams& params) {
  if (params.k < 1) throw std::invalid_argument("sample_candidates: k must be >= 1");
  std::vector<gateway::CompletionRequest> out;
  if (provider.supports_n()) {
    auto r = gateway::single_user_request(gen_params_of(params, params.seed), instruction.text);
    r.n = params.k;
    out.push_back(std::move(r));
  } else {
    for (int i = 0; i < params.k; ++i) {
      out.push_back(gateway::single_user_request(
          gen_params_of(params, params.seed + static_cast<std::uint64_t>(i)), instruction.text));
    }
  }
  return out;
}

CandidateSet sample_candidates(gateway::Gateway& gw, const JudgeInstruction& instruction,
                               const SampleParams& params) {
  CandidateSet set;
  set.requested = static_cast<std::size_t>(params.k);
  const auto requests = candidate_requests(gw.provider(), instruction, params);
  if (requests.size() == 1) {
    // A failed n=k request propagates: nothing usable came back.
    const auto completion = gw.complete(requests.front());
    for (const auto& text : completion.texts) {
      set.candidates.push_back(judgment::make_judgment(text, instruction.format_class,
                                             gen_params_of(params, params.seed)));
    }
  } else {
    for (const auto& req : requests) {
      try {
        const auto completion = gw.complete(req);
        set.candidates.push_back(judgment::make_judgment(
            completion.texts.front(), instruction.format_class, gen_params_of(params, *req.seed)));
      } catch (const gateway::GatewayError&) {
        // Surfaced through the partial flag.
      }
    }
    if (set.candidates.empty()) {
      throw gateway::GatewayError("sample_candidates: every request failed for '" +
                                  instruction.qa_id + "'");
    }
  }
  set.partial = set.candidates.size() < set.requested;
  return set;
}

std::optional<PairIndices> select_pair(std::span<const Judgment> candidates, Verdict ground_truth) {
  if (ground_truth == Verdict::unparseable) {
    throw std::invalid_argument("select_pair: ground truth must be A or B");
  }
  std::optional<std::size_t> correct, wrong;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Verdict v = candidates[i].verdict;
    if (v == Verdict::unparseable) continue;
    if (v == ground_truth) {
      if (!correct) correct = i;
    } else if (!wrong) {
      wrong = i;
    }
  }
  if (!correct || !wrong) return std::nullopt;
  return PairIndices{*correct, *wrong};
}

std::vector<PairIndices> select_all_pairs(std::span<const Judgment> candidates, Verdict ground_truth,
                                          std::size_t limit) {
  std::vector<std::size_t> correct, wrong;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Verdict v = candidates[i].verdict;
    if (v == Verdict::unparseable) continue;
    (v == ground_truth ? correct : wrong).push_back(i);
  }
  std::vector<PairIndices> out;
  for (std::size_t c : correct) {
    for (std::size_t w : wrong) {
      if (out.size() >= limit) return out;
      out.push_back({c, w});
    }
  }
  return out;
}

std::optional<DpoRecord> filter_and_pair(const PoolItem& item, std::span<const Judgment> candidates) {
  auto pick = select_pair(candidates, item.ground_truth);
  if (!pick) return std::nullopt;
  return make_record(item.id, item, candidates[pick->chosen], candidates[pick->rejected]);
}

std::string YieldReport::to_text() const {
  std::ostringstream os;
  os << "instructions_in: " << instructions_in << '\n'
     << "pairs_out: " << pairs_out << '\n'
     << "partial_samples: " << partial_samples << '\n';
  for (const auto& [reason, n] : exclusions) os << "excluded." << reason << ": " << n << '\n';
  return os.str();
}

SamplerResult run_sampler(gateway::Gateway& gw, std::span<const PoolItem> pool,
                          const SamplerOptions& options) {
  SamplerResult result;
  result.report.instructions_in = pool.size();
  for (const auto& item : pool) {
    const CandidateSet set = sample_candidates(gw, item.instruction, options.params);
    if (set.partial) ++result.report.partial_samples;
    const std::span<const Judgment> cands(set.candidates);
    if (options.all_pairs) {
      const auto pairs = select_all_pairs(cands, item.ground_truth, options.max_pairs_per_instruction);
      if (pairs.empty()) ++result.report.exclusions[exclusion_reason(cands, item.ground_truth)];
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        result.records.push_back(make_record(item.id + "#" + std::to_string(p), item,
                                             cands[pairs[p].chosen], cands[pairs[p].rejected]));
      }
    } else if (auto rec = filter_and_pair(item, cands)) {
      result.records.push_back(std::move(*rec));
    } else {
      ++result.report.exclusions[exclusion_reason(cands, item.ground_truth)];
    }
  }
  result.report.pairs_out = result.records.size();
  return result;
}

}  // namespace judgeforge::dpo

namespace judgeforge {

Json RecordSchema<dpo::PoolItem>::encode(const dpo::PoolItem& r) {
  return Json{{"id", r.id},
              {"instruction", encode_instruction(r.instruction)},
              {"ground_truth", to_string(r.ground_truth)}};
}

dpo::PoolItem RecordSchema<dpo::PoolItem>::decode(const Json& j) {
  dpo::PoolItem r;
  r.id = json_field::nonempty_string(j, "id");
  r.instruction = decode_instruction(json_field::require(j, "instruction"));
  auto v = parse_verdict_name(json_field::string(j, "ground_truth"));
  if (!v || *v == Verdict::unparseable) throw SchemaError("ground_truth", "expected A or B");
  r.ground_truth = *v;
  return r;
}

}  // namespace judgeforge
