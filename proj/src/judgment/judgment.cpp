#include "judgeforge/judgment/judgment.hpp"

#include "judgeforge/core/text.hpp"

namespace judgeforge::judgment {

namespace {

constexpr std::string_view kMarkerA = "[[A]]";
constexpr std::string_view kMarkerB = "[[B]]";

VerdictMatch locate_bracket(std::string_view raw) {
  const auto a = raw.rfind(kMarkerA);
  const auto b = raw.rfind(kMarkerB);
  if (a == std::string_view::npos && b == std::string_view::npos) return {};
  if (b == std::string_view::npos || (a != std::string_view::npos && a > b)) {
    return {Verdict::A, a, a + kMarkerA.size()};
  }
  return {Verdict::B, b, b + kMarkerB.size()};
}

// End (exclusive) of the balanced {...} starting at raw[open], honoring
// JSON string literals; npos when unbalanced.
std::size_t match_brace(std::string_view raw, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

Verdict verdict_from_value(const Json& v) {
  if (!v.is_string()) return Verdict::unparseable;
  std::string s = text::lowercase_ascii(text::collapse_whitespace(v.get<std::string>()));
  while (!s.empty() && (s.back() == ']' || s.back() == '.' || s.back() == '\'' || s.back() == '"')) {
    s.pop_back();
  }
  while (!s.empty() && (s.front() == '[' || s.front() == '\'' || s.front() == '"')) s.erase(0, 1);
  if (s.empty()) return Verdict::unparseable;
  const char last = s.back();
  if (last != 'a' && last != 'b') return Verdict::unparseable;
  if (s.size() > 1) {
    const char prev = s[s.size() - 2];
    if ((prev >= 'a' && prev <= 'z') || (prev >= '0' && prev <= '9')) return Verdict::unparseable;
  }
  return last == 'a' ? Verdict::A : Verdict::B;
}

VerdictMatch locate_json(std::string_view raw) {
  for (std::size_t pos = raw.rfind('{'); pos != std::string_view::npos;
       pos = pos == 0 ? std::string_view::npos : raw.rfind('{', pos - 1)) {
    const std::size_t end = match_brace(raw, pos);
    if (end == std::string_view::npos) continue;
    const Json j = Json::parse(raw.substr(pos, end - pos), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    for (auto key : forge::kJsonVerdictKeys) {
      auto it = j.find(std::string(key));
      if (it == j.end()) continue;
      const Verdict v = verdict_from_value(*it);
      if (v != Verdict::unparseable) return {v, pos, end};
    }
  }
  return {};
}

}  // namespace

JudgeInstruction render_instruction(const forge::JudgeTemplate& tmpl, const QAPair& qa, Order order) {
  JudgeInstruction inst;
  const bool chosen_first = order == Order::chosen_first;
  inst.text = forge::substitute_placeholders(tmpl.text(), qa.question,
                                             chosen_first ? qa.chosen : qa.rejected,
                                             chosen_first ? qa.rejected : qa.chosen);
  inst.qa_id = qa.id;
  inst.order = order;
  inst.format_class = tmpl.output_format_class();
  inst.lang = tmpl.lang();
  return inst;
}

std::string render_pair(const forge::JudgeTemplate& tmpl, std::string_view question,
                        std::string_view response_a, std::string_view response_b) {
  return forge::substitute_placeholders(tmpl.text(), question, response_a, response_b);
}

VerdictMatch locate_verdict(std::string_view raw, OutputFormatClass format_class) {
  switch (format_class) {
    case OutputFormatClass::bracket_verdict:
      return locate_bracket(raw);
    case OutputFormatClass::json:
      return locate_json(raw);
    case OutputFormatClass::other: {
      auto m = locate_bracket(raw);
      return m.verdict != Verdict::unparseable ? m : locate_json(raw);
    }
  }
  return {};
}

Verdict parse_verdict(std::string_view raw, OutputFormatClass format_class) {
  return locate_verdict(raw, format_class).verdict;
}

Judgment make_judgment(std::string raw, OutputFormatClass format_class, GenParams params) {
  Judgment j;
  const VerdictMatch m = locate_verdict(raw, format_class);
  j.verdict = m.verdict;
  if (m.verdict == Verdict::unparseable) {
    j.cot = std::string(text::rtrim(raw));
  } else {
    std::string cot = raw.substr(0, m.begin) + raw.substr(m.end);
    j.cot = std::string(text::rtrim(cot));
  }
  j.raw = std::move(raw);
  j.gen_params = std::move(params);
  return j;
}

GenParams greedy_params(std::string model) {
  GenParams p;
  p.model = std::move(model);
  p.temperature = 0.0;
  p.top_p = 1.0;
  return p;
}

Judgment judge_once(gateway::Gateway& gw, const JudgeInstruction& instruction, const GenParams& params) {
  const auto completion = gw.complete(gateway::single_user_request(params, instruction.text));
  return make_judgment(completion.texts.front(), instruction.format_class, params);
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::consistent_correct:
      return "consistent_correct";
    case Classification::consistent_wrong:
      return "consistent_wrong";
    case Classification::inconsistent:
      return "inconsistent";
    case Classification::unparseable:
      return "unparseable";
  }
  return "unparseable";
}

std::optional<Classification> parse_classification(std::string_view s) {
  for (auto c : {Classification::consistent_correct, Classification::consistent_wrong,
                 Classification::inconsistent, Classification::unparseable}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Route r) {
  switch (r) {
    case Route::to_sft:
      return "to_sft";
    case Route::to_dpo_pool:
      return "to_dpo_pool";
    case Route::discard:
      return "discard";
  }
  return "discard";
}

Classification classify(Verdict forward, Verdict swapped) {
  if (forward == Verdict::unparseable || swapped == Verdict::unparseable) {
    return Classification::unparseable;
  }
  if (forward == Verdict::A && swapped == Verdict::B) return Classification::consistent_correct;
  if (forward == Verdict::B && swapped == Verdict::A) return Classification::consistent_wrong;
  return Classification::inconsistent;  // same literal slot both times
}

SwapOutcome swap_protocol(gateway::Gateway& gw, const forge::JudgeTemplate& tmpl, const QAPair& qa,
                          const GenParams& params) {
  if (!qa.has_ground_truth) {
    throw PreconditionError("swap_protocol: pair '" + qa.id + "' has no ground truth");
  }
  SwapOutcome out;
  out.qa_id = qa.id;
  out.forward_instruction = render_instruction(tmpl, qa, Order::chosen_first);
  out.swapped_instruction = render_instruction(tmpl, qa, Order::rejected_first);
  out.judgment_forward = judge_once(gw, out.forward_instruction, params);
  out.judgment_swapped = judge_once(gw, out.swapped_instruction, params);
  out.classification = classify(out.judgment_forward.verdict, out.judgment_swapped.verdict);
  return out;
}

std::vector<SwapOutcome> swap_protocol_batch(gateway::Gateway& gw,
                                             std::span<const forge::JudgeTemplate> templates,
                                             std::span<const QAPair> pairs, const GenParams& params,
                                             std::size_t max_in_flight) {
  if (templates.size() != pairs.size()) {
    throw std::invalid_argument("swap_protocol_batch: one template per pair required");
  }
  std::vector<SwapOutcome> outcomes(pairs.size());
  std::vector<gateway::CompletionRequest> requests;
  requests.reserve(pairs.size() * 2);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const QAPair& qa = pairs[i];
    if (!qa.has_ground_truth) {
      throw PreconditionError("swap_protocol: pair '" + qa.id + "' has no ground truth");
    }
    outcomes[i].qa_id = qa.id;
    outcomes[i].forward_instruction = render_instruction(templates[i], qa, Order::chosen_first);
    outcomes[i].swapped_instruction = render_instruction(templates[i], qa, Order::rejected_first);
    requests.push_back(gateway::single_user_request(params, outcomes[i].forward_instruction.text));
    requests.push_back(gateway::single_user_request(params, outcomes[i].swapped_instruction.text));
  }
  const auto slots = gw.complete_batch(requests, max_in_flight);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].ok()) {
      throw gateway::GatewayError("judging '" + pairs[i / 2].id + "' failed: " + slots[i].error);
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& o = outcomes[i];
    o.judgment_forward =
        make_judgment(slots[2 * i].completion->texts.front(), o.forward_instruction.format_class, params);
    o.judgment_swapped = make_judgment(slots[2 * i + 1].completion->texts.front(),
                                       o.swapped_instruction.format_class, params);
    o.classification = classify(o.judgment_forward.verdict, o.judgment_swapped.verdict);
  }
  return outcomes;
}

Route route(Classification c) {
  switch (c) {
    case Classification::consistent_correct:
      return Route::to_sft;
    case Classification::consistent_wrong:
    case Classification::inconsistent:
      return Route::to_dpo_pool;
    case Classification::unparseable:
      return Route::discard;
  }
  return Route::discard;
}

}  // namespace judgeforge::judgment

namespace judgeforge {

Json RecordSchema<judgment::RoutedItem>::encode(const judgment::RoutedItem& r) {
  const auto& o = r.outcome;
  return Json{{"id", r.qa.id},
              {"qa", RecordSchema<QAPair>::encode(r.qa)},
              {"classification", judgment::to_string(o.classification)},
              {"route", judgment::to_string(r.route)},
              {"forward", Json{{"instruction", encode_instruction(o.forward_instruction)},
                               {"judgment", encode_judgment(o.judgment_forward)}}},
              {"swapped", Json{{"instruction", encode_instruction(o.swapped_instruction)},
                               {"judgment", encode_judgment(o.judgment_swapped)}}}};
}

judgment::RoutedItem RecordSchema<judgment::RoutedItem>::decode(const Json& j) {
  judgment::RoutedItem r;
  r.qa = RecordSchema<QAPair>::decode(json_field::require(j, "qa"));
  auto cls = judgment::parse_classification(json_field::string(j, "classification"));
  if (!cls) throw SchemaError("classification", "unknown value");
  r.outcome.classification = *cls;
  r.outcome.qa_id = r.qa.id;
  const Json& fwd = json_field::require(j, "forward");
  const Json& swp = json_field::require(j, "swapped");
  r.outcome.forward_instruction = decode_instruction(json_field::require(fwd, "instruction"));
  r.outcome.judgment_forward = decode_judgment(json_field::require(fwd, "judgment"));
  r.outcome.swapped_instruction = decode_instruction(json_field::require(swp, "instruction"));
  r.outcome.judgment_swapped = decode_judgment(json_field::require(swp, "judgment"));
  const std::string route = json_field::string(j, "route");
  r.route = judgment::route(r.outcome);
  if (judgment::to_string(r.route) != route) throw SchemaError("route", "inconsistent with classification");
  return r;
}

}  // namespace judgeforge
