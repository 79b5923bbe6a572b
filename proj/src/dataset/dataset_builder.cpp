#include "judgeforge/dataset/dataset_builder.hpp"

#include <charconv>
#include <sstream>

#include "judgeforge/core/overlap.hpp"
#include "judgeforge/core/text.hpp"

namespace judgeforge::dataset {

std::size_t answer_length(std::string_view answer) {
  return text::utf8_length(text::collapse_whitespace(answer));
}

LengthClass length_class(std::string_view chosen, std::string_view rejected) {
  const std::size_t c = answer_length(chosen);
  const std::size_t r = answer_length(rejected);
  if (c > r) return LengthClass::chosen_longer;
  if (r > c) return LengthClass::rejected_longer;
  return LengthClass::tie;
}

std::vector<std::size_t> balance_length_indices(std::span<const LengthClass> classes, Rng& rng) {
  std::vector<std::size_t> chosen_longer, rejected_longer;
  std::vector<bool> keep(classes.size(), false);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    switch (classes[i]) {
      case LengthClass::chosen_longer:
        chosen_longer.push_back(i);
        break;
      case LengthClass::rejected_longer:
        rejected_longer.push_back(i);
        break;
      case LengthClass::tie:
        keep[i] = true;
        break;
    }
  }
  const std::size_t target = std::min(chosen_longer.size(), rejected_longer.size());
  for (const auto* side : {&chosen_longer, &rejected_longer}) {
    for (std::size_t j : rng.sample_indices(side->size(), target)) keep[(*side)[j]] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

Ratio Ratio::parse(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("ratio must look like 4:1");
  Ratio r;
  auto parse_part = [&](std::string_view part, std::uint32_t& out) {
    auto res = std::from_chars(part.data(), part.data() + part.size(), out);
    if (res.ec != std::errc{} || res.ptr != part.data() + part.size() || out == 0) {
      throw std::invalid_argument("ratio parts must be positive integers: " + std::string(s));
    }
  };
  parse_part(s.substr(0, colon), r.judge);
  parse_part(s.substr(colon + 1), r.general);
  return r;
}

MixCounts mix_counts(std::size_t judge_available, std::size_t general_available, Ratio ratio) {
  if (ratio.judge == 0 || ratio.general == 0) {
    throw std::invalid_argument("mix_general: ratio parts must be positive");
  }
  if (judge_available == 0 || general_available == 0) {
    throw std::invalid_argument("mix_general: both judge and general records are required");
  }
  MixCounts c;
  // judge/general <= p/q  <=>  judge*q <= general*p
  if (static_cast<std::uint64_t>(judge_available) * ratio.general <=
      static_cast<std::uint64_t>(general_available) * ratio.judge) {
    c.judge = judge_available;
    c.general = judge_available * ratio.general / ratio.judge;
  } else {
    c.general = general_available;
    c.judge = general_available * ratio.judge / ratio.general;
  }
  return c;
}

SftRecord to_sft_record(const GeneralChatRecord& g) {
  SftRecord r;
  r.id = g.id;
  r.kind = RecordKind::general;
  r.instruction.text = g.prompt;
  r.instruction.qa_id = g.id;
  r.target.raw = g.response;
  r.target.cot = g.response;
  r.target.verdict = Verdict::unparseable;
  return r;
}

std::string SftBuildReport::to_text() const {
  std::ostringstream os;
  os << "routed_in: " << routed_in << '\n'
     << "general_in: " << general_in << '\n'
     << "overlap_removed: " << overlap_removed << '\n'
     << "chosen_longer_before_balance: " << chosen_longer_before << '\n'
     << "rejected_longer_before_balance: " << rejected_longer_before << '\n'
     << "ties: " << ties << '\n'
     << "balanced_kept: " << balanced_kept << '\n'
     << "judge_kept: " << judge_kept << '\n'
     << "general_kept: " << general_kept << '\n'
     << "total: " << total() << '\n';
  if (ratio) {
    os << "ratio_configured: " << ratio->judge << ':' << ratio->general << '\n';
  } else {
    os << "ratio_configured: disabled\n";
  }
  if (general_kept > 0) {
    os << "ratio_achieved: " << static_cast<double>(judge_kept) / static_cast<double>(general_kept)
       << ":1\n";
  }
  return os.str();
}

SftBuildResult emit_sft(std::span<const judgment::RoutedItem> routed,
                        std::span<const GeneralChatRecord> general, const SftBuildOptions& options,
                        RngSeed seed) {
  SftBuildResult result;
  auto& rep = result.report;
  rep.routed_in = routed.size();
  rep.general_in = general.size();
  rep.ratio = options.ratio;

  for (const auto& item : routed) {
    if (item.outcome.classification != judgment::Classification::consistent_correct) {
      throw PreconditionError("emit_sft: item '" + item.qa.id + "' is " +
                              std::string(judgment::to_string(item.outcome.classification)));
    }
    if (item.outcome.forward_instruction.order != Order::chosen_first ||
        item.outcome.judgment_forward.verdict != chosen_position(Order::chosen_first)) {
      throw PreconditionError("emit_sft: forward judgment of '" + item.qa.id +
                              "' does not name the chosen answer");
    }
  }

  const BenchmarkIndex index(options.benchmark_questions);
  std::vector<judgment::RoutedItem> clean;
  for (const auto& item : routed) {
    if (!index.empty() && index.overlaps(item.qa.question)) {
      ++rep.overlap_removed;
    } else {
      clean.push_back(item);
    }
  }
  std::vector<GeneralChatRecord> clean_general;
  for (const auto& g : general) {
    if (!index.empty() && index.overlaps(g.prompt)) {
      ++rep.overlap_removed;
    } else {
      clean_general.push_back(g);
    }
  }

  for (const auto& item : clean) {
    switch (length_class(item.qa.chosen, item.qa.rejected)) {
      case LengthClass::chosen_longer:
        ++rep.chosen_longer_before;
        break;
      case LengthClass::rejected_longer:
        ++rep.rejected_longer_before;
        break;
      case LengthClass::tie:
        ++rep.ties;
        break;
    }
  }
  Rng balance_rng = Rng::derive(seed, "balance_length");
  const auto balanced = balance_length(
      std::span<const judgment::RoutedItem>(clean),
      [](const judgment::RoutedItem& it) {
        return std::pair<std::string_view, std::string_view>(it.qa.chosen, it.qa.rejected);
      },
      balance_rng);
  rep.balanced_kept = balanced.size();

  std::vector<SftRecord> judge_records;
  judge_records.reserve(balanced.size());
  for (const auto& item : balanced) {
    SftRecord r;
    r.id = item.qa.id;
    r.kind = RecordKind::judge;
    r.instruction = item.outcome.forward_instruction;
    r.target = item.outcome.judgment_forward;
    r.swapped_target = item.outcome.judgment_swapped.raw;
    judge_records.push_back(std::move(r));
  }
  std::vector<SftRecord> general_records;
  for (const auto& g : clean_general) general_records.push_back(to_sft_record(g));

  Rng mix_rng = Rng::derive(seed, "mix_general");
  if (options.ratio) {
    result.records = mix_general(std::span<const SftRecord>(judge_records),
                                 std::span<const SftRecord>(general_records), *options.ratio, mix_rng);
  } else {
    result.records = std::move(judge_records);
    result.records.insert(result.records.end(), general_records.begin(), general_records.end());
    mix_rng.shuffle(result.records);
  }
  for (const auto& r : result.records) {
    (r.kind == RecordKind::judge ? rep.judge_kept : rep.general_kept)++;
  }
  return result;
}

}  // namespace judgeforge::dataset

namespace judgeforge {

Json RecordSchema<dataset::GeneralChatRecord>::encode(const dataset::GeneralChatRecord& r) {
  return Json{{"id", r.id}, {"prompt", r.prompt}, {"response", r.response}};
}

dataset::GeneralChatRecord RecordSchema<dataset::GeneralChatRecord>::decode(const Json& j) {
  return {json_field::nonempty_string(j, "id"), json_field::nonempty_string(j, "prompt"),
          json_field::string(j, "response")};
}

}  // namespace judgeforge
