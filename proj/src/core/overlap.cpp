#include "judgeforge/core/overlap.hpp"

#include "judgeforge/core/text.hpp"

namespace judgeforge {

namespace {

template <class Fn>
void for_each_shingle(const std::vector<std::string>& tokens, std::size_t width, Fn&& fn) {
  if (tokens.size() < width) return;
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    std::string s = tokens[i];
    for (std::size_t k = 1; k < width; ++k) {
      s.push_back(' ');
      s += tokens[i + k];
    }
    if (fn(s)) return;
  }
}

}  // namespace

std::string normalize_question(std::string_view q) {
  return text::collapse_whitespace(text::lowercase_ascii(q));
}

BenchmarkIndex::BenchmarkIndex(std::span<const std::string> questions, std::size_t shingle_width)
    : width_(shingle_width) {
  for (const auto& q : questions) {
    std::string norm = normalize_question(q);
    for_each_shingle(text::split_whitespace(norm), width_, [&](const std::string& s) {
      shingles_.insert(s);
      return false;
    });
    exact_.insert(std::move(norm));
  }
}

bool BenchmarkIndex::overlaps(std::string_view question) const {
  const std::string norm = normalize_question(question);
  if (exact_.contains(norm)) return true;
  bool hit = false;
  for_each_shingle(text::split_whitespace(norm), width_, [&](const std::string& s) {
    hit = shingles_.contains(s);
    return hit;
  });
  return hit;
}

OverlapSplit overlap_filter(std::span<const QAPair> pairs,
                            std::span<const std::string> benchmark_questions) {
  OverlapSplit split;
  const BenchmarkIndex index(benchmark_questions);
  for (const auto& p : pairs) {
    if (!index.empty() && index.overlaps(p.question)) {
      split.removed.push_back(p);
    } else {
      split.kept.push_back(p);
    }
  }
  return split;
}

}  // namespace judgeforge
