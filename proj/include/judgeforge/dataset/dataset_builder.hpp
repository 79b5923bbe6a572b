#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "judgeforge/core/records.hpp"
#include "judgeforge/core/rng.hpp"
#include "judgeforge/judgment/judgment.hpp"

namespace judgeforge::dataset {

// Unicode scalar count after whitespace collapse.
std::size_t answer_length(std::string_view answer);

enum class LengthClass { chosen_longer, rejected_longer, tie };

LengthClass length_class(std::string_view chosen, std::string_view rejected);

// Indices to keep (ascending). The majority of {chosen_longer,
// rejected_longer} is uniformly subsampled down to the minority count; ties
// always survive.
std::vector<std::size_t> balance_length_indices(std::span<const LengthClass> classes, Rng& rng);

// get(item) must return a pair of (chosen, rejected) answer texts.
template <class T, class Get>
std::vector<T> balance_length(std::span<const T> items, Get get, Rng& rng) {
  std::vector<LengthClass> classes;
  classes.reserve(items.size());
  for (const T& item : items) {
    const auto [chosen, rejected] = get(item);
    classes.push_back(length_class(chosen, rejected));
  }
  std::vector<T> out;
  for (std::size_t i : balance_length_indices(classes, rng)) out.push_back(items[i]);
  return out;
}

struct Ratio {
  std::uint32_t judge = 4;
  std::uint32_t general = 1;

  // Parses "4:1".
  static Ratio parse(std::string_view s);
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct MixCounts {
  std::size_t judge = 0;
  std::size_t general = 0;
};

// The limiting side is kept whole; the other side is floored to the ratio.
MixCounts mix_counts(std::size_t judge_available, std::size_t general_available, Ratio ratio);

// Subsamples the overrepresented side to the exact ratio, then shuffles the
// union. Throws std::invalid_argument if either side is empty.
template <class T>
std::vector<T> mix_general(std::span<const T> judge, std::span<const T> general, Ratio ratio, Rng& rng) {
  const MixCounts counts = mix_counts(judge.size(), general.size(), ratio);
  std::vector<T> out;
  out.reserve(counts.judge + counts.general);
  for (std::size_t i : rng.sample_indices(judge.size(), counts.judge)) out.push_back(judge[i]);
  for (std::size_t i : rng.sample_indices(general.size(), counts.general)) out.push_back(general[i]);
  rng.shuffle(out);
  return out;
}

// Non-judge chat data mixed in to preserve general ability.
struct GeneralChatRecord {
  std::string id;
  std::string prompt;
  std::string response;

  friend bool operator==(const GeneralChatRecord&, const GeneralChatRecord&) = default;
};

SftRecord to_sft_record(const GeneralChatRecord& g);

struct SftBuildOptions {
  // nullopt disables mixing: every record is kept.
  std::optional<Ratio> ratio = Ratio{};
  std::vector<std::string> benchmark_questions;
};

struct SftBuildReport {
  std::size_t routed_in = 0;
  std::size_t general_in = 0;
  std::size_t overlap_removed = 0;
  std::size_t chosen_longer_before = 0;
  std::size_t rejected_longer_before = 0;
  std::size_t ties = 0;
  std::size_t balanced_kept = 0;
  std::size_t judge_kept = 0;
  std::size_t general_kept = 0;
  std::optional<Ratio> ratio;

  std::size_t total() const { return judge_kept + general_kept; }
  std::string to_text() const;
};

struct SftBuildResult {
  std::vector<SftRecord> records;
  SftBuildReport report;
};

// One record per routed item built from the forward (chosen_first)
// judgment. Steps: overlap filter, length balance, general-data mix.
// Throws PreconditionError for any item that is not consistent_correct or
// whose forward verdict does not name slot A.
SftBuildResult emit_sft(std::span<const judgment::RoutedItem> routed,
                        std::span<const GeneralChatRecord> general, const SftBuildOptions& options,
                        RngSeed seed);

}  // namespace judgeforge::dataset

namespace judgeforge {
template <>
struct RecordSchema<dataset::GeneralChatRecord> {
  static constexpr const char* name = "general_record";
  static Json encode(const dataset::GeneralChatRecord& r);
  static dataset::GeneralChatRecord decode(const Json& j);
  static const std::string& key(const dataset::GeneralChatRecord& r) { return r.id; }
};
}  // namespace judgeforge
