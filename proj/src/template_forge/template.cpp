#include "judgeforge/template_forge/template.hpp"

#include <array>

#include "judgeforge/core/text.hpp"

namespace judgeforge::forge {

namespace {

constexpr std::array<std::string_view, 3> kPlaceholders{kInputPlaceholder, kResponseAPlaceholder,
                                                        kResponseBPlaceholder};

bool is_ident_char(char c, bool first) {
  if (c == '_' || (c >= 'a' && c <= 'z')) return true;
  return !first && c >= '0' && c <= '9';
}

// Length of a "{identifier}" token at s[pos], or 0.
std::size_t placeholder_at(std::string_view s, std::size_t pos) {
  if (s[pos] != '{') return 0;
  std::size_t i = pos + 1;
  while (i < s.size() && is_ident_char(s[i], i == pos + 1)) ++i;
  if (i == pos + 1 || i >= s.size() || s[i] != '}') return 0;
  return i - pos + 1;
}

bool line_contains_delimiter(std::string_view text) {
  return text::contains(text, "{Start of Instruction}") || text::contains(text, "{End of Instruction}");
}

constexpr std::string_view kBaseTemplate =
    "Please act as an impartial judge and evaluate the quality of the responses provided by two AI "
    "assistants to the user question displayed below. You should choose the assistant that follows "
    "the user's instructions and answers the user's question better. Your evaluation should consider "
    "factors such as the helpfulness, relevance, accuracy, depth, creativity, and level of detail of "
    "their responses. Begin your evaluation by comparing the two responses and provide a short "
    "explanation. Avoid any position biases and ensure that the order in which the responses were "
    "presented does not influence your decision. Do not allow the length of the responses to "
    "influence your evaluation. Do not favor certain names of the assistants. Be as objective as "
    "possible. Please first analysis both of the answer step by step, directly point out the position "
    "of error and output why it is an error in detail when finding error in analysis. If the question "
    "is open-ended, directly point out why the rejected answer is worse than the chosen one. After "
    "providing your explanation, output your final verdict by strictly following this format: "
    "'[[A]]' if assistant A is better, '[[B]]' if assistant B is better.\n"
    "\n"
    "[User Question]\n"
    "{input}\n"
    "\n"
    "{The Start of Assistant A's Answer}\n"
    "{response_a}\n"
    "{The End of Assistant A's Answer}\n"
    "\n"
    "{The Start of Assistant B's Answer}\n"
    "{response_b}\n"
    "{The End of Assistant B's Answer}\n";

}  // namespace

std::string Violation::message() const {
  switch (kind) {
    case ViolationKind::empty_text:
      return "template text is empty";
    case ViolationKind::placeholder_count:
      return "placeholder " + subject + " occurs " + std::to_string(count) + " times (expected 1)";
    case ViolationKind::unknown_placeholder:
      return "unknown placeholder " + subject;
    case ViolationKind::delimiter_leak:
      return "instruction delimiter leaked into output: " + subject;
    case ViolationKind::verdict_convention:
      return "no parseable verdict convention ([[A]]/[[B]] or a JSON verdict field)";
  }
  return "violation";
}

std::vector<Violation> validate_template(std::string_view text) {
  std::vector<Violation> out;
  if (text::rtrim(text).empty()) {
    out.push_back({ViolationKind::empty_text, "", 0});
    return out;
  }
  for (auto ph : kPlaceholders) {
    const std::size_t n = text::count_occurrences(text, ph);
    if (n != 1) out.push_back({ViolationKind::placeholder_count, std::string(ph), n});
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    const std::size_t len = placeholder_at(text, i);
    if (len == 0) continue;
    const std::string_view tok = text.substr(i, len);
    bool known = false;
    for (auto ph : kPlaceholders) known = known || tok == ph;
    if (!known) out.push_back({ViolationKind::unknown_placeholder, std::string(tok), 1});
    i += len - 1;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = text.substr(start, end - start);
    if (line_contains_delimiter(line)) {
      out.push_back({ViolationKind::delimiter_leak, std::string(text::rtrim(line)), 1});
    }
    start = end + 1;
  }
  return out;
}

bool declares_json_verdict(std::string_view text) {
  const std::string lower = text::lowercase_ascii(text);
  if (!text::contains(lower, "json")) return false;
  for (auto key : kJsonVerdictKeys) {
    if (text::contains(lower, "\"" + std::string(key) + "\"")) return true;
  }
  return false;
}

std::optional<OutputFormatClass> detect_verdict_convention(std::string_view text) {
  if (text::contains(text, "[[A]]") && text::contains(text, "[[B]]")) {
    return OutputFormatClass::bracket_verdict;
  }
  if (declares_json_verdict(text)) return OutputFormatClass::json;
  return std::nullopt;
}

std::string_view to_string(Provenance p) { return p == Provenance::base ? "base" : "rewritten"; }

JudgeTemplate JudgeTemplate::make(std::string text, Lang lang, OutputFormatClass format_class,
                                  Provenance provenance) {
  auto violations = validate_template(text);
  if (!violations.empty()) {
    std::string what = "invalid judge template:";
    for (const auto& v : violations) what += " " + v.message() + ";";
    throw TemplateError(what, std::move(violations));
  }
  JudgeTemplate t;
  t.text_ = std::move(text);
  t.lang_ = lang;
  t.format_class_ = format_class;
  t.provenance_ = provenance;
  return t;
}

std::string substitute_placeholders(std::string_view text, std::string_view input,
                                    std::string_view response_a, std::string_view response_b) {
  std::string out;
  out.reserve(text.size() + input.size() + response_a.size() + response_b.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t brace = text.find('{', i);
    if (brace == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, brace - i));
    const std::string_view rest = text.substr(brace);
    if (rest.starts_with(kInputPlaceholder)) {
      out.append(input);
      i = brace + kInputPlaceholder.size();
    } else if (rest.starts_with(kResponseAPlaceholder)) {
      out.append(response_a);
      i = brace + kResponseAPlaceholder.size();
    } else if (rest.starts_with(kResponseBPlaceholder)) {
      out.append(response_b);
      i = brace + kResponseBPlaceholder.size();
    } else {
      out.push_back('{');
      i = brace + 1;
    }
  }
  return out;
}

std::string_view base_judge_template() { return kBaseTemplate; }

JudgeTemplate base_template() {
  return JudgeTemplate::make(std::string(kBaseTemplate), Lang::english,
                             OutputFormatClass::bracket_verdict, Provenance::base);
}

}  // namespace judgeforge::forge
