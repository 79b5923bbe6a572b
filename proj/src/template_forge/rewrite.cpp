#include "judgeforge/template_forge/rewrite.hpp"

#include <cmath>

#include "judgeforge/core/text.hpp"

namespace judgeforge::forge {

namespace {

constexpr std::string_view kRewriteSkeleton =
    "Next, I will provide you with an instruction for evaluating using an LLM. Please help me "
    "rewrite this instruction.\n"
    "\n"
    "------------ {Start of Instruction} ------------\n"
    "\n"
    "{eval_instruction}\n"
    "\n"
    "------------ {End of Instruction} ------------\n"
    "\n"
    "The rewriting requirements are as follows:\n"
    "\n"
    "1. Please note that {input}, {response_a}, and {response_b} are placeholders for evaluation "
    "content. Do not modify them and ensure they are retained.\n"
    "\n"
    "2. Regarding the language of the evaluation instruction: The rewritten evaluation instruction "
    "should be in {lang}, and it must conform to the natural expression habits of {lang}.\n"
    "\n"
    "3. Regarding the content of the evaluation principles: {constraint}\n"
    "\n"
    "4. Regarding the presentation format of the evaluation principles: Please present the rewritten "
    "principles in the format of {principle_format}.\n"
    "\n"
    "5. Regarding the output format of the evaluation results: Please specify the output format of "
    "the evaluation results as {output_format} to facilitate subsequent extraction of results.\n"
    "\n"
    "6. Please rewrite the roles in the evaluation instruction. Based on the new evaluation "
    "principles, provide a persona that better aligns with the requirements.\n"
    "\n"
    "Please rewrite the evaluation instruction according to the above requirements. Directly output "
    "the rewritten instruction without including any additional content, including "
    "\"------------ {Start of Instruction} ------------\" and "
    "\"------------ {End of Instruction} ------------\".\n";

constexpr double kProbabilityTolerance = 1e-9;

OptionTable table_from_json(const Json& j, const char* field) {
  if (!j.is_array()) throw SchemaError(field, "expected array of {text, p}");
  OptionTable t;
  for (const Json& e : j) {
    t.push_back({json_field::string(e, "text"), json_field::number(e, "p")});
  }
  return t;
}

Json table_to_json(const OptionTable& t) {
  Json arr = Json::array();
  for (const auto& o : t) arr.push_back(Json{{"text", o.text}, {"p", o.probability}});
  return arr;
}

void validate_table(const OptionTable& t, const char* name) {
  if (t.empty()) throw std::invalid_argument(std::string(name) + ": table is empty");
  double sum = 0.0;
  for (const auto& o : t) {
    if (!(o.probability >= 0.0) || !std::isfinite(o.probability)) {
      throw std::invalid_argument(std::string(name) + ": negative or non-finite probability for '" +
                                  o.text + "'");
    }
    sum += o.probability;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw std::invalid_argument(std::string(name) + ": probabilities sum to " +
                                std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

RewriteConfig RewriteConfig::defaults() {
  RewriteConfig c;
  c.constraints = {
      {"Please rewrite the evaluation principles to be more complex, providing more detailed "
       "requirements for potential scenarios, and include an example for each requirement.",
       0.05},
      {"Please keep the evaluation principles unchanged.", 0.75},
      {"Please rewrite the evaluation principles to be more complex, adding detailed descriptions "
       "to each principle.",
       0.15},
      {"Please completely discard the existing evaluation principles and create a brand-new set of "
       "evaluation principles.",
       0.05},
  };
  c.principle_formats = {
      {"The same as original instruction", 0.7},
      {"Clearer MarkDown", 0.25},
      {"Only context description", 0.05},
  };
  c.output_formats = {
      {"The same as original instruction", 0.85},
      {"json", 0.1},
      {"Other format which is easy to extract answer", 0.05},
  };
  c.langs = {{"Simplified Chinese", 0.6}, {"English", 0.4}};
  c.base_template = std::string(base_judge_template());
  return c;
}

RewriteConfig RewriteConfig::from_json(const Json& j) {
  RewriteConfig c = defaults();
  if (j.contains("constraints")) c.constraints = table_from_json(j.at("constraints"), "constraints");
  if (j.contains("principle_formats")) {
    c.principle_formats = table_from_json(j.at("principle_formats"), "principle_formats");
  }
  if (j.contains("output_formats")) {
    c.output_formats = table_from_json(j.at("output_formats"), "output_formats");
  }
  if (j.contains("langs")) c.langs = table_from_json(j.at("langs"), "langs");
  if (j.contains("base_template")) c.base_template = json_field::string(j, "base_template");
  c.validate();
  return c;
}

Json RewriteConfig::to_json() const {
  return Json{{"constraints", table_to_json(constraints)},
              {"principle_formats", table_to_json(principle_formats)},
              {"output_formats", table_to_json(output_formats)},
              {"langs", table_to_json(langs)},
              {"base_template", base_template}};
}

void RewriteConfig::validate() const {
  validate_table(constraints, "constraints");
  validate_table(principle_formats, "principle_formats");
  validate_table(output_formats, "output_formats");
  validate_table(langs, "langs");
  for (const auto& l : langs) {
    if (!parse_lang(l.text)) throw std::invalid_argument("langs: unsupported language '" + l.text + "'");
  }
  if (auto v = validate_template(base_template); !v.empty()) {
    throw TemplateError("base_template: " + v.front().message(), v);
  }
}

const WeightedOption& pick_option(const OptionTable& table, double u) {
  if (table.empty()) throw std::invalid_argument("pick_option: empty table");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("pick_option: u outside [0,1)");
  double hi = 0.0;
  for (const auto& o : table) {
    hi += o.probability;
    if (u < hi) return o;
  }
  // Rounding can leave the last cumulative bound a hair below 1.
  for (auto it = table.rbegin(); it != table.rend(); ++it) {
    if (it->probability > 0.0) return *it;
  }
  return table.back();
}

RewriteOptions options_from_draws(const RewriteConfig& config, double u_constraint,
                                  double u_principle, double u_output, double u_lang) {
  return {pick_option(config.constraints, u_constraint).text,
          pick_option(config.principle_formats, u_principle).text,
          pick_option(config.output_formats, u_output).text,
          pick_option(config.langs, u_lang).text};
}

RewriteOptions sample_rewrite_options(const RewriteConfig& config, Rng& rng) {
  config.validate();
  const double a = rng.uniform();
  const double b = rng.uniform();
  const double c = rng.uniform();
  const double d = rng.uniform();
  return options_from_draws(config, a, b, c, d);
}

std::string build_rewrite_instruction(const RewriteConfig& config, const RewriteOptions& options) {
  const std::pair<std::string_view, std::string_view> slots[] = {
      {"{eval_instruction}", config.base_template},
      {"{lang}", options.lang},
      {"{constraint}", options.constraint},
      {"{principle_format}", options.principle_format},
      {"{output_format}", options.output_format},
  };
  const std::string_view skel = kRewriteSkeleton;
  std::string out;
  std::size_t i = 0;
  while (i < skel.size()) {
    const std::size_t brace = skel.find('{', i);
    if (brace == std::string_view::npos) {
      out.append(skel.substr(i));
      break;
    }
    out.append(skel.substr(i, brace - i));
    bool replaced = false;
    for (const auto& [name, value] : slots) {
      if (skel.substr(brace).starts_with(name)) {
        out.append(value);
        i = brace + name.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) {
      out.push_back('{');
      i = brace + 1;
    }
  }
  return out;
}

Lang lang_of(const RewriteOptions& options) {
  auto l = parse_lang(options.lang);
  if (!l) throw std::invalid_argument("unsupported language '" + options.lang + "'");
  return *l;
}

OutputFormatClass expected_format_class(const RewriteOptions& options) {
  const std::string f = text::lowercase_ascii(options.output_format);
  if (f == "json") return OutputFormatClass::json;
  if (f == "the same as original instruction") return OutputFormatClass::bracket_verdict;
  return OutputFormatClass::other;
}

std::vector<Violation> validate_rewrite(std::string_view text, const RewriteOptions& options) {
  auto violations = validate_template(text);
  const auto expected = expected_format_class(options);
  bool ok = false;
  if (expected == OutputFormatClass::json) {
    ok = declares_json_verdict(text);
  } else {
    ok = detect_verdict_convention(text).has_value();
  }
  if (!ok) violations.push_back({ViolationKind::verdict_convention, options.output_format, 0});
  return violations;
}

RewriteResult rewrite_template(gateway::Gateway& gw, const RewriteConfig& config,
                               const RewriteOptions& options, int max_attempts,
                               const GenParams& params) {
  if (max_attempts < 1) throw std::invalid_argument("rewrite_template: max_attempts must be >= 1");
  const std::string prompt = build_rewrite_instruction(config, options);
  const Lang lang = lang_of(options);
  const std::uint64_t base_seed = params.seed.value_or(0);
  std::vector<Violation> last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    GenParams p = params;
    p.seed = base_seed + static_cast<std::uint64_t>(attempt - 1);
    const auto completion = gw.complete(gateway::single_user_request(p, prompt));
    std::string text(text::rtrim(completion.texts.front()));
    if (auto first = text.find_first_not_of(" \t\r\n"); first != std::string::npos) {
      text.erase(0, first);
    }
    last = validate_rewrite(text, options);
    if (last.empty()) {
      const auto cls = expected_format_class(options) == OutputFormatClass::json
                           ? OutputFormatClass::json
                           : *detect_verdict_convention(text);
      return {JudgeTemplate::make(std::move(text), lang, cls, Provenance::rewritten), options,
              attempt};
    }
  }
  std::string what = "rewrite failed after " + std::to_string(max_attempts) + " attempts:";
  for (const auto& v : last) what += " " + v.message() + ";";
  throw RewriteFailure(what, max_attempts, std::move(last));
}

}  // namespace judgeforge::forge

namespace judgeforge {

Json RecordSchema<forge::TemplateRecord>::encode(const forge::TemplateRecord& r) {
  const auto& t = r.judge_template;
  Json j{{"id", r.id},
         {"text", t.text()},
         {"lang", to_string(t.lang())},
         {"output_format_class", to_string(t.output_format_class())},
         {"provenance", forge::to_string(t.provenance())},
         {"attempts", r.attempts}};
  if (r.options) {
    j["options"] = Json{{"constraint", r.options->constraint},
                        {"principle_format", r.options->principle_format},
                        {"output_format", r.options->output_format},
                        {"lang", r.options->lang}};
  }
  return j;
}

forge::TemplateRecord RecordSchema<forge::TemplateRecord>::decode(const Json& j) {
  std::string id = json_field::nonempty_string(j, "id");
  auto lang = parse_lang(json_field::string(j, "lang"));
  if (!lang) throw SchemaError("lang", "unknown language");
  auto cls = parse_format_class(json_field::string(j, "output_format_class"));
  if (!cls) throw SchemaError("output_format_class", "unknown output format class");
  const std::string prov = json_field::string(j, "provenance");
  forge::Provenance p;
  if (prov == "base") {
    p = forge::Provenance::base;
  } else if (prov == "rewritten") {
    p = forge::Provenance::rewritten;
  } else {
    throw SchemaError("provenance", "expected base or rewritten");
  }
  std::optional<forge::RewriteOptions> options;
  if (auto it = j.find("options"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw SchemaError("options", "expected an object");
    options = forge::RewriteOptions{json_field::string(*it, "constraint"),
                                    json_field::string(*it, "principle_format"),
                                    json_field::string(*it, "output_format"),
                                    json_field::string(*it, "lang")};
  }
  int attempts = j.contains("attempts") ? static_cast<int>(json_field::integer(j, "attempts")) : 0;
  try {
    return forge::TemplateRecord{std::move(id),
                                 forge::JudgeTemplate::make(json_field::string(j, "text"), *lang, *cls, p),
                                 std::move(options), attempts};
  } catch (const forge::TemplateError& e) {
    throw SchemaError("text", e.what());
  }
}

}  // namespace judgeforge
