#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "judgeforge/core/records.hpp"
#include "judgeforge/gateway/gateway.hpp"
#include "judgeforge/template_forge/template.hpp"

namespace judgeforge::judgment {

// {input} <- question, slot A/B <- answers per order.
JudgeInstruction render_instruction(const forge::JudgeTemplate& tmpl, const QAPair& qa, Order order);

// Renders arbitrary (question, A, B) text; used by the tournament and eval.
std::string render_pair(const forge::JudgeTemplate& tmpl, std::string_view question,
                        std::string_view response_a, std::string_view response_b);

struct VerdictMatch {
  Verdict verdict = Verdict::unparseable;
  // Byte span of the authoritative marker (or JSON object) inside raw.
  std::size_t begin = 0;
  std::size_t end = 0;
};

// bracket_verdict: last "[[A]]"/"[[B]]" wins. json: the last JSON object
// carrying a recognized verdict key. other: bracket first, then json.
VerdictMatch locate_verdict(std::string_view raw, OutputFormatClass format_class);

Verdict parse_verdict(std::string_view raw, OutputFormatClass format_class);

// Splits raw into cot (raw minus the final marker, right-trimmed) + verdict.
Judgment make_judgment(std::string raw, OutputFormatClass format_class, GenParams params);

// Greedy decoding, top_p 1.
GenParams greedy_params(std::string model);

Judgment judge_once(gateway::Gateway& gw, const JudgeInstruction& instruction, const GenParams& params);

enum class Classification { consistent_correct, consistent_wrong, inconsistent, unparseable };
enum class Route { to_sft, to_dpo_pool, discard };

std::string_view to_string(Classification c);
std::string_view to_string(Route r);
std::optional<Classification> parse_classification(std::string_view s);

struct SwapOutcome {
  std::string qa_id;
  Classification classification = Classification::unparseable;
  JudgeInstruction forward_instruction;  // chosen_first
  JudgeInstruction swapped_instruction;  // rejected_first
  Judgment judgment_forward;
  Judgment judgment_swapped;

  friend bool operator==(const SwapOutcome&, const SwapOutcome&) = default;
};

// forward is the chosen_first run, swapped the rejected_first run.
Classification classify(Verdict forward, Verdict swapped);

SwapOutcome swap_protocol(gateway::Gateway& gw, const forge::JudgeTemplate& tmpl, const QAPair& qa,
                          const GenParams& params);

// Runs the protocol for many pairs through one bounded batch. Transport
// failures propagate after the whole batch has been attempted.
std::vector<SwapOutcome> swap_protocol_batch(gateway::Gateway& gw,
                                             std::span<const forge::JudgeTemplate> templates,
                                             std::span<const QAPair> pairs, const GenParams& params,
                                             std::size_t max_in_flight);

Route route(Classification c);
inline Route route(const SwapOutcome& o) { return route(o.classification); }

// A judged pair as persisted between pipeline stages.
struct RoutedItem {
  QAPair qa;
  SwapOutcome outcome;
  Route route = Route::discard;

  friend bool operator==(const RoutedItem&, const RoutedItem&) = default;
};

}  // namespace judgeforge::judgment

namespace judgeforge {
template <>
struct RecordSchema<judgment::RoutedItem> {
  static constexpr const char* name = "routed_item";
  static Json encode(const judgment::RoutedItem& r);
  static judgment::RoutedItem decode(const Json& j);
  static const std::string& key(const judgment::RoutedItem& r) { return r.qa.id; }
};
}  // namespace judgeforge
