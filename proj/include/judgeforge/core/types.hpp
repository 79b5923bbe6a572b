#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace judgeforge {

enum class Source { math_prm, skywork_subset, general_chat, synthetic_test };

// A question with a trusted chosen/rejected answer pair.
struct QAPair {
  std::string id;
  std::string question;
  std::string chosen;
  std::string rejected;
  Source source = Source::synthetic_test;
  bool has_ground_truth = true;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

// Which answer sits in slot A of a rendered instruction.
enum class Order { chosen_first, rejected_first };

enum class OutputFormatClass { bracket_verdict, json, other };

enum class Lang { english, simplified_chinese };

struct JudgeInstruction {
  std::string text;
  std::string qa_id;
  Order order = Order::chosen_first;
  OutputFormatClass format_class = OutputFormatClass::bracket_verdict;
  Lang lang = Lang::english;

  friend bool operator==(const JudgeInstruction&, const JudgeInstruction&) = default;
};

enum class Verdict { A, B, unparseable };

// Position that holds the chosen answer under a given order.
constexpr Verdict chosen_position(Order order) {
  return order == Order::chosen_first ? Verdict::A : Verdict::B;
}

// Generation parameters a judgment was produced with.
struct GenParams {
  std::string model;
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 2048;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const GenParams&, const GenParams&) = default;
};

struct Judgment {
  std::string raw;
  std::string cot;
  Verdict verdict = Verdict::unparseable;
  GenParams gen_params;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

enum class RecordKind { judge, general, policy };

// One supervised target. For kind == general the instruction text is a plain
// chat prompt and the target carries no verdict.
struct SftRecord {
  std::string id;
  RecordKind kind = RecordKind::judge;
  JudgeInstruction instruction;
  Judgment target;
  // The swapped-order judgment kept as provenance.
  std::optional<std::string> swapped_target;

  friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

struct DpoRecord {
  std::string id;
  RecordKind kind = RecordKind::judge;
  JudgeInstruction instruction;
  Judgment chosen;
  Judgment rejected;

  friend bool operator==(const DpoRecord&, const DpoRecord&) = default;
};

struct BenchRecord {
  std::string id;
  std::string category;
  std::string question;
  std::string chosen;
  std::string rejected;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

// Precondition violated by the caller.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

std::string_view to_string(Source s);
std::string_view to_string(Order o);
std::string_view to_string(OutputFormatClass c);
std::string_view to_string(Lang l);
std::string_view to_string(Verdict v);
std::string_view to_string(RecordKind k);

std::optional<Source> parse_source(std::string_view s);
std::optional<Order> parse_order(std::string_view s);
std::optional<OutputFormatClass> parse_format_class(std::string_view s);
std::optional<Lang> parse_lang(std::string_view s);
std::optional<Verdict> parse_verdict_name(std::string_view s);
std::optional<RecordKind> parse_record_kind(std::string_view s);

}  // namespace judgeforge
