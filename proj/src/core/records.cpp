#include "judgeforge/core/records.hpp"

#include <array>
#include <utility>

namespace judgeforge {

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view name) {
  for (const auto& [value, text] : table) {
    if (text == name) return value;
  }
  return std::nullopt;
}

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, text] : table) {
    if (v == value) return text;
  }
  return "?";
}

constexpr std::array<std::pair<Source, std::string_view>, 4> kSources{{
    {Source::math_prm, "math_prm"},
    {Source::skywork_subset, "skywork_subset"},
    {Source::general_chat, "general_chat"},
    {Source::synthetic_test, "synthetic_test"},
}};
constexpr std::array<std::pair<Order, std::string_view>, 2> kOrders{{
    {Order::chosen_first, "chosen_first"},
    {Order::rejected_first, "rejected_first"},
}};
constexpr std::array<std::pair<OutputFormatClass, std::string_view>, 3> kFormatClasses{{
    {OutputFormatClass::bracket_verdict, "bracket_verdict"},
    {OutputFormatClass::json, "json"},
    {OutputFormatClass::other, "other"},
}};
constexpr std::array<std::pair<Lang, std::string_view>, 2> kLangs{{
    {Lang::english, "English"},
    {Lang::simplified_chinese, "Simplified Chinese"},
}};
constexpr std::array<std::pair<Verdict, std::string_view>, 3> kVerdicts{{
    {Verdict::A, "A"},
    {Verdict::B, "B"},
    {Verdict::unparseable, "unparseable"},
}};
constexpr std::array<std::pair<RecordKind, std::string_view>, 3> kKinds{{
    {RecordKind::judge, "judge"},
    {RecordKind::general, "general"},
    {RecordKind::policy, "policy"},
}};

template <class E>
E enum_field(const Json& j, const char* field, std::optional<E> (*parse)(std::string_view)) {
  const std::string s = json_field::string(j, field);
  auto v = parse(s);
  if (!v) throw SchemaError(field, "unknown value '" + s + "'");
  return *v;
}

}  // namespace

std::string_view to_string(Source s) { return name_of(kSources, s); }
std::string_view to_string(Order o) { return name_of(kOrders, o); }
std::string_view to_string(OutputFormatClass c) { return name_of(kFormatClasses, c); }
std::string_view to_string(Lang l) { return name_of(kLangs, l); }
std::string_view to_string(Verdict v) { return name_of(kVerdicts, v); }
std::string_view to_string(RecordKind k) { return name_of(kKinds, k); }

std::optional<Source> parse_source(std::string_view s) { return lookup(kSources, s); }
std::optional<Order> parse_order(std::string_view s) { return lookup(kOrders, s); }
std::optional<OutputFormatClass> parse_format_class(std::string_view s) {
  return lookup(kFormatClasses, s);
}
std::optional<Lang> parse_lang(std::string_view s) { return lookup(kLangs, s); }
std::optional<Verdict> parse_verdict_name(std::string_view s) { return lookup(kVerdicts, s); }
std::optional<RecordKind> parse_record_kind(std::string_view s) { return lookup(kKinds, s); }

namespace json_field {

const Json& require(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw SchemaError(field, "missing field");
  return *it;
}

std::string string(const Json& j, const char* field) {
  const Json& v = require(j, field);
  if (!v.is_string()) throw SchemaError(field, "expected string");
  return v.get<std::string>();
}

std::string nonempty_string(const Json& j, const char* field) {
  std::string s = string(j, field);
  if (s.empty()) throw SchemaError(field, "must be nonempty");
  return s;
}

bool boolean(const Json& j, const char* field) {
  const Json& v = require(j, field);
  if (!v.is_boolean()) throw SchemaError(field, "expected boolean");
  return v.get<bool>();
}

double number(const Json& j, const char* field) {
  const Json& v = require(j, field);
  if (!v.is_number()) throw SchemaError(field, "expected number");
  return v.get<double>();
}

std::int64_t integer(const Json& j, const char* field) {
  const Json& v = require(j, field);
  if (!v.is_number_integer()) throw SchemaError(field, "expected integer");
  return v.get<std::int64_t>();
}

}  // namespace json_field

namespace detail {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::strict); }

}  // namespace detail

Json encode_gen_params(const GenParams& p) {
  Json j{{"model", p.model},
         {"temperature", p.temperature},
         {"top_p", p.top_p},
         {"max_tokens", p.max_tokens}};
  if (p.seed) j["seed"] = *p.seed;
  return j;
}

GenParams decode_gen_params(const Json& j) {
  GenParams p;
  p.model = json_field::string(j, "model");
  p.temperature = json_field::number(j, "temperature");
  p.top_p = json_field::number(j, "top_p");
  p.max_tokens = static_cast<int>(json_field::integer(j, "max_tokens"));
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw SchemaError("seed", "expected unsigned integer");
    p.seed = it->get<std::uint64_t>();
  }
  return p;
}

Json encode_instruction(const JudgeInstruction& inst) {
  return Json{{"text", inst.text},
              {"qa_id", inst.qa_id},
              {"order", to_string(inst.order)},
              {"format_class", to_string(inst.format_class)},
              {"lang", to_string(inst.lang)}};
}

JudgeInstruction decode_instruction(const Json& j) {
  if (!j.is_object()) throw SchemaError("instruction", "expected object");
  JudgeInstruction inst;
  inst.text = json_field::string(j, "text");
  inst.qa_id = json_field::string(j, "qa_id");
  inst.order = enum_field(j, "order", &parse_order);
  inst.format_class = enum_field(j, "format_class", &parse_format_class);
  inst.lang = enum_field(j, "lang", &parse_lang);
  return inst;
}

Json encode_judgment(const Judgment& jd) {
  return Json{{"raw", jd.raw},
              {"cot", jd.cot},
              {"verdict", to_string(jd.verdict)},
              {"gen_params", encode_gen_params(jd.gen_params)}};
}

Judgment decode_judgment(const Json& j) {
  if (!j.is_object()) throw SchemaError("judgment", "expected object");
  Judgment jd;
  jd.raw = json_field::string(j, "raw");
  jd.cot = json_field::string(j, "cot");
  jd.verdict = enum_field(j, "verdict", &parse_verdict_name);
  jd.gen_params = decode_gen_params(json_field::require(j, "gen_params"));
  return jd;
}

Json RecordSchema<QAPair>::encode(const QAPair& r) {
  return Json{{"id", r.id},
              {"question", r.question},
              {"chosen", r.chosen},
              {"rejected", r.rejected},
              {"source", to_string(r.source)},
              {"has_ground_truth", r.has_ground_truth}};
}

QAPair RecordSchema<QAPair>::decode(const Json& j) {
  QAPair r;
  r.id = json_field::nonempty_string(j, "id");
  r.question = json_field::nonempty_string(j, "question");
  r.chosen = json_field::string(j, "chosen");
  r.rejected = json_field::string(j, "rejected");
  if (r.chosen == r.rejected) throw SchemaError("rejected", "must differ from chosen");
  r.source = enum_field(j, "source", &parse_source);
  r.has_ground_truth = json_field::boolean(j, "has_ground_truth");
  return r;
}

namespace {

// Meta fields shared by sft_record and dpo_record.
Json instruction_meta(const JudgeInstruction& inst) {
  return Json{{"qa_id", inst.qa_id},
              {"order", to_string(inst.order)},
              {"format_class", to_string(inst.format_class)},
              {"lang", to_string(inst.lang)}};
}

JudgeInstruction instruction_from_meta(std::string text, const Json& meta) {
  JudgeInstruction inst;
  inst.text = std::move(text);
  inst.qa_id = json_field::string(meta, "qa_id");
  inst.order = enum_field(meta, "order", &parse_order);
  inst.format_class = enum_field(meta, "format_class", &parse_format_class);
  inst.lang = enum_field(meta, "lang", &parse_lang);
  return inst;
}

Json judgment_meta(const Judgment& jd) {
  return Json{{"cot", jd.cot},
              {"verdict", to_string(jd.verdict)},
              {"gen_params", encode_gen_params(jd.gen_params)}};
}

Judgment judgment_from_meta(std::string raw, const Json& meta) {
  if (!meta.is_object()) throw SchemaError("meta", "expected object");
  Judgment jd;
  jd.raw = std::move(raw);
  jd.cot = json_field::string(meta, "cot");
  jd.verdict = enum_field(meta, "verdict", &parse_verdict_name);
  jd.gen_params = decode_gen_params(json_field::require(meta, "gen_params"));
  return jd;
}

const Json& meta_object(const Json& j) {
  const Json& meta = json_field::require(j, "meta");
  if (!meta.is_object()) throw SchemaError("meta", "expected object");
  return meta;
}

}  // namespace

Json RecordSchema<SftRecord>::encode(const SftRecord& r) {
  Json meta = instruction_meta(r.instruction);
  meta["kind"] = to_string(r.kind);
  meta["target"] = judgment_meta(r.target);
  if (r.swapped_target) meta["swapped_target"] = *r.swapped_target;
  return Json{{"id", r.id},
              {"instruction", r.instruction.text},
              {"target", r.target.raw},
              {"meta", std::move(meta)}};
}

SftRecord RecordSchema<SftRecord>::decode(const Json& j) {
  SftRecord r;
  r.id = json_field::nonempty_string(j, "id");
  const Json& meta = meta_object(j);
  r.kind = enum_field(meta, "kind", &parse_record_kind);
  r.instruction = instruction_from_meta(json_field::string(j, "instruction"), meta);
  r.target = judgment_from_meta(json_field::string(j, "target"), json_field::require(meta, "target"));
  if (meta.contains("swapped_target")) r.swapped_target = json_field::string(meta, "swapped_target");
  return r;
}

Json RecordSchema<DpoRecord>::encode(const DpoRecord& r) {
  Json meta = instruction_meta(r.instruction);
  meta["kind"] = to_string(r.kind);
  meta["chosen"] = judgment_meta(r.chosen);
  meta["rejected"] = judgment_meta(r.rejected);
  return Json{{"id", r.id},
              {"instruction", r.instruction.text},
              {"chosen", r.chosen.raw},
              {"rejected", r.rejected.raw},
              {"meta", std::move(meta)}};
}

DpoRecord RecordSchema<DpoRecord>::decode(const Json& j) {
  DpoRecord r;
  r.id = json_field::nonempty_string(j, "id");
  const Json& meta = meta_object(j);
  r.kind = enum_field(meta, "kind", &parse_record_kind);
  r.instruction = instruction_from_meta(json_field::string(j, "instruction"), meta);
  r.chosen = judgment_from_meta(json_field::string(j, "chosen"), json_field::require(meta, "chosen"));
  r.rejected =
      judgment_from_meta(json_field::string(j, "rejected"), json_field::require(meta, "rejected"));
  return r;
}

Json RecordSchema<BenchRecord>::encode(const BenchRecord& r) {
  return Json{{"id", r.id},
              {"category", r.category},
              {"question", r.question},
              {"chosen", r.chosen},
              {"rejected", r.rejected}};
}

BenchRecord RecordSchema<BenchRecord>::decode(const Json& j) {
  BenchRecord r;
  r.id = json_field::nonempty_string(j, "id");
  r.category = json_field::nonempty_string(j, "category");
  r.question = json_field::nonempty_string(j, "question");
  r.chosen = json_field::string(j, "chosen");
  r.rejected = json_field::string(j, "rejected");
  if (r.chosen == r.rejected) throw SchemaError("rejected", "must differ from chosen");
  return r;
}

}  // namespace judgeforge
