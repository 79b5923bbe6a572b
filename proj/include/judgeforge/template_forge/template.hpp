#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "judgeforge/core/types.hpp"

namespace judgeforge::forge {

inline constexpr std::string_view kInputPlaceholder = "{input}";
inline constexpr std::string_view kResponseAPlaceholder = "{response_a}";
inline constexpr std::string_view kResponseBPlaceholder = "{response_b}";

inline constexpr std::string_view kStartDelimiter = "------------ {Start of Instruction} ------------";
inline constexpr std::string_view kEndDelimiter = "------------ {End of Instruction} ------------";

enum class ViolationKind {
  empty_text,
  placeholder_count,    // one of the three placeholders occurs != 1 times
  unknown_placeholder,  // {identifier} that render() would leave behind
  delimiter_leak,       // rewrite-prompt delimiter lines copied into output
  verdict_convention,   // neither [[A]]/[[B]] nor a declared JSON verdict field
};

struct Violation {
  ViolationKind kind;
  std::string subject;
  std::size_t count = 0;

  std::string message() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

// Empty result means the text is a usable template.
std::vector<Violation> validate_template(std::string_view text);

// Output-format class implied by the text itself: bracket markers win, then a
// declared JSON verdict field; nullopt when neither is present.
std::optional<OutputFormatClass> detect_verdict_convention(std::string_view text);

// True when the text asks for JSON output with one of the recognized
// verdict keys quoted (see kJsonVerdictKeys).
bool declares_json_verdict(std::string_view text);

inline constexpr std::string_view kJsonVerdictKeys[] = {"verdict", "final_verdict", "winner",
                                                        "better",  "result",        "choice",
                                                        "preferred"};

enum class Provenance { base, rewritten };
std::string_view to_string(Provenance p);

class TemplateError : public std::invalid_argument {
 public:
  TemplateError(const std::string& what, std::vector<Violation> violations)
      : std::invalid_argument(what), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// A judge-instruction template whose text has passed validate_template. The
// only way to obtain one is make(), so holding a JudgeTemplate is proof of
// validation.
class JudgeTemplate {
 public:
  static JudgeTemplate make(std::string text, Lang lang, OutputFormatClass format_class,
                            Provenance provenance);

  const std::string& text() const { return text_; }
  Lang lang() const { return lang_; }
  OutputFormatClass output_format_class() const { return format_class_; }
  Provenance provenance() const { return provenance_; }

  friend bool operator==(const JudgeTemplate&, const JudgeTemplate&) = default;

 private:
  JudgeTemplate() = default;
  std::string text_;
  Lang lang_ = Lang::english;
  OutputFormatClass format_class_ = OutputFormatClass::bracket_verdict;
  Provenance provenance_ = Provenance::base;
};

// Single left-to-right pass; substituted values are never rescanned.
std::string substitute_placeholders(std::string_view text, std::string_view input,
                                    std::string_view response_a, std::string_view response_b);

// The stock English judge template the rewriting system starts from.
std::string_view base_judge_template();
JudgeTemplate base_template();

}  // namespace judgeforge::forge
