#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "judgeforge/core/types.hpp"

namespace judgeforge {

inline constexpr std::size_t kShingleWidth = 13;

// Lowercase + whitespace collapse.
std::string normalize_question(std::string_view q);

// Index over benchmark questions: exact normalized texts plus every run of
// kShingleWidth consecutive whitespace tokens.
class BenchmarkIndex {
 public:
  explicit BenchmarkIndex(std::span<const std::string> questions,
                          std::size_t shingle_width = kShingleWidth);

  bool overlaps(std::string_view question) const;
  bool empty() const { return exact_.empty(); }

 private:
  std::size_t width_;
  std::unordered_set<std::string> exact_;
  std::unordered_set<std::string> shingles_;
};

struct OverlapSplit {
  std::vector<QAPair> kept;
  std::vector<QAPair> removed;
};

OverlapSplit overlap_filter(std::span<const QAPair> pairs,
                            std::span<const std::string> benchmark_questions);

}  // namespace judgeforge
