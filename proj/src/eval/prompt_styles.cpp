#include "judgeforge/eval/eval_bench.hpp"

namespace judgeforge::eval {

namespace {

constexpr std::string_view kOfficialEnglish =
    "Please act as an impartial judge and evaluate the quality of the responses provided by two AI "
    "assistants to the user question displayed below. You should choose the assistant that follows "
    "the user's instructions and answers the user's question better. Your evaluation should consider "
    "factors such as the helpfulness, relevance, accuracy, depth, creativity, and level of detail of "
    "their responses. Begin your evaluation by comparing the two responses and provide a short "
    "explanation. Avoid any position biases and ensure that the order in which the responses were "
    "presented does not influence your decision. Do not allow the length of the responses to "
    "influence your evaluation. Do not favor certain names of the assistants. Be as objective as "
    "possible. After providing your explanation, output your final verdict by strictly following "
    "this format: \"[[A]]\" if assistant A is better, \"[[B]]\" if assistant B is better.\n"
    "\n"
    "[User Question]\n"
    "{input}\n"
    "\n"
    "[The Start of Assistant A's Answer]\n"
    "{response_a}\n"
    "[The End of Assistant A's Answer]\n"
    "\n"
    "[The Start of Assistant B's Answer]\n"
    "{response_b}\n"
    "[The End of Assistant B's Answer]\n";

constexpr std::string_view kBasicChinese =
    "下面我将给你一个问题和两个回答，请你首先简要分析两个回答，然后判断哪个回答更好。如果你认为A更好就输出[[A]]，"
    "如果你认为B更好就输出[[B]]。\n"
    "\n"
    "[用户问题]\n"
    "{input}\n"
    "\n"
    "[助手A的回答开始]\n"
    "{response_a}\n"
    "[助手A的回答结束]\n"
    "\n"
    "[助手B的回答开始]\n"
    "{response_b}\n"
    "[助手B的回答结束]\n";

constexpr std::string_view kInstructionalChinese =
    "下面我会给出一个问题和两个回答，请判断哪个回答更好。注意逐步分析并给出结论。\n"
    "\n"
    "注意以下几点:\n"
    "\n"
    "1. 如果给出的问题是开放性问题，请着重评价回答的指令遵循程度和准确性。\n"
    "2. 如果给出的问题包含歧视、色情、危险等内容，模型应该拒绝回答。请不要选择生成了上述有害内容、生成了错误信息"
    "或者不负责任的回答。\n"
    "3. 请准确判断回答的内容是否和原问题严格相关，不要让回答的长度和前后位置影响你的判断，而应该更重视答案的实用性"
    "、有帮助性。\n"
    "\n"
    "问题：{input}\n"
    "\n"
    "回答A：{response_a}\n"
    "\n"
    "回答B：{response_b}\n"
    "\n"
    "如果你认为回答A更好，请在分析最后输出'[[A]]'，如果你认为回答B更好，请在分析最后输出'[[B]]'。\n";

}  // namespace

std::string_view to_string(PromptStyle s) {
  switch (s) {
    case PromptStyle::official_english:
      return "official_english";
    case PromptStyle::basic_chinese:
      return "basic_chinese";
    case PromptStyle::instructional_chinese:
      return "instructional_chinese";
  }
  return "official_english";
}

std::optional<PromptStyle> parse_prompt_style(std::string_view s) {
  for (auto p : {PromptStyle::official_english, PromptStyle::basic_chinese, PromptStyle::instructional_chinese}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

forge::JudgeTemplate load_prompt_style(PromptStyle style) {
  switch (style) {
    case PromptStyle::official_english:
      return forge::JudgeTemplate::make(std::string(kOfficialEnglish), Lang::english,
                                        OutputFormatClass::bracket_verdict, forge::Provenance::base);
    case PromptStyle::basic_chinese:
      return forge::JudgeTemplate::make(std::string(kBasicChinese), Lang::simplified_chinese,
                                        OutputFormatClass::bracket_verdict, forge::Provenance::base);
    case PromptStyle::instructional_chinese:
      return forge::JudgeTemplate::make(std::string(kInstructionalChinese), Lang::simplified_chinese,
                                        OutputFormatClass::bracket_verdict, forge::Provenance::base);
  }
  throw std::invalid_argument("unknown prompt style");
}

forge::JudgeTemplate load_prompt_style(std::string_view name) {
  auto style = parse_prompt_style(name);
  if (!style) throw std::invalid_argument("unknown prompt style '" + std::string(name) + "'");
  return load_prompt_style(*style);
}

}  // namespace judgeforge::eval
