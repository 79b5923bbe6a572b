#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "judgeforge/core/overlap.hpp"
#include "judgeforge/core/records.hpp"
#include "judgeforge/core/rng.hpp"
#include "judgeforge/core/text.hpp"
#include "support.hpp"

using namespace judgeforge;
using testsupport::TempDir;
using namespace judgeforge::text;

TEST(Text, CollapseAndLower) {
  EXPECT_EQ(collapse_whitespace("  a \t b\n\nc  "), "a b c");
  EXPECT_EQ(lowercase_ascii("AbC Ünï"), "abc Ünï");
  EXPECT_EQ(utf8_length("héllo 你好"), 8u);
  EXPECT_EQ(count_occurrences("abcabcab", "ab"), 3u);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(RngSeed{42}), b(RngSeed{42}), c(RngSeed{43});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, DerivedStreamsDiffer) {
  Rng a = Rng::derive(RngSeed{1}, "balance_length");
  Rng b = Rng::derive(RngSeed{1}, "mix_general");
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  Rng r(RngSeed{5});
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, SampleIndicesDistinctSorted) {
  Rng r(RngSeed{9});
  for (std::size_t n : {0u, 1u, 5u, 50u}) {
    for (std::size_t k = 0; k <= n; k += (n / 5 + 1)) {
      auto idx = r.sample_indices(n, k);
      ASSERT_EQ(idx.size(), k);
      EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
      EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), k);
      for (auto i : idx) EXPECT_LT(i, n);
    }
  }
}

TEST(Records, QaPairRoundTripWithNewlinesAndUnicode) {
  TempDir dir;
  std::vector<QAPair> in{testsupport::qa("a", "line one\nline two", "答案：四\n", "cinq \"quoted\" \\ slash"),
                         testsupport::qa("b", "tab\there", "x", "y")};
  in[1].has_ground_truth = false;
  in[1].source = Source::general_chat;
  write_records(in, dir / "qa.jsonl");
  const std::string raw = testsupport::slurp(dir / "qa.jsonl");
  EXPECT_EQ(std::count(raw.begin(), raw.end(), '\n'), 2);  // one line per record
  auto back = read_records_strict<QAPair>(dir / "qa.jsonl");
  EXPECT_EQ(back, in);
}

TEST(Records, MalformedLineReportedWithNumber) {
  TempDir dir;
  std::vector<QAPair> in;
  for (int i = 0; i < 4; ++i) in.push_back(testsupport::qa("id" + std::to_string(i)));
  write_records(in, dir / "qa.jsonl");
  auto text = testsupport::slurp(dir / "qa.jsonl");
  // insert a bad third line
  auto second_end = text.find('\n', text.find('\n') + 1);
  text.insert(second_end + 1, "{\"id\": \"bad\", \"question\": \"q\"}\n");
  testsupport::spit(dir / "qa.jsonl", text);
  auto res = read_records<QAPair>(dir / "qa.jsonl");
  EXPECT_EQ(res.records.size(), 4u);
  ASSERT_EQ(res.errors.size(), 1u);
  EXPECT_EQ(res.errors[0].line, 3u);
  EXPECT_FALSE(res.errors[0].field.empty());
  EXPECT_THROW(read_records_strict<QAPair>(dir / "qa.jsonl"), SchemaError);
}

TEST(Records, NotJsonAndDuplicateIds) {
  TempDir dir;
  const std::string good = detail::dump_line(RecordSchema<QAPair>::encode(testsupport::qa("x")));
  testsupport::spit(dir / "f.jsonl", good + "\nnot json\n\n" + good + "\n");
  auto res = read_records<QAPair>(dir / "f.jsonl");
  EXPECT_EQ(res.records.size(), 1u);
  ASSERT_EQ(res.errors.size(), 2u);
  EXPECT_EQ(res.errors[0].line, 2u);
  EXPECT_EQ(res.errors[1].line, 4u);
  EXPECT_EQ(res.errors[1].field, "id");
}

TEST(Records, QaPairRejectsIdenticalAnswers) {
  Json j = RecordSchema<QAPair>::encode(testsupport::qa("x"));
  j["rejected"] = j["chosen"];
  EXPECT_THROW(RecordSchema<QAPair>::decode(j), SchemaError);
}

TEST(Records, SftAndDpoRoundTrip) {
  TempDir dir;
  SftRecord s;
  s.id = "s1";
  s.instruction = {"指令\n文本", "q1", Order::chosen_first, OutputFormatClass::json, Lang::simplified_chinese};
  s.target = {"raw [[A]]", "raw", Verdict::A, {"m", 0.0, 1.0, 512, 7}};
  s.swapped_target = "swapped [[B]]";
  write_records(std::vector<SftRecord>{s}, dir / "s.jsonl");
  EXPECT_EQ(read_records_strict<SftRecord>(dir / "s.jsonl").front(), s);

  DpoRecord d;
  d.id = "d1";
  d.instruction = s.instruction;
  d.chosen = s.target;
  d.rejected = {"no [[B]]", "no", Verdict::B, {"m", 0.9, 1.0, 512, std::nullopt}};
  write_records(std::vector<DpoRecord>{d}, dir / "d.jsonl");
  EXPECT_EQ(read_records_strict<DpoRecord>(dir / "d.jsonl").front(), d);
}

TEST(Records, MissingFileThrows) {
  EXPECT_THROW(read_records<QAPair>("/nonexistent/dir/none.jsonl"), IoError);
}

TEST(Overlap, ExactMatchAfterNormalization) {
  std::vector<std::string> bench{"What  is the Capital\nof France?"};
  std::vector<QAPair> pairs{testsupport::qa("a", "what is the capital of france?"), testsupport::qa("b", "what is 2+2")};
  auto split = overlap_filter(pairs, bench);
  ASSERT_EQ(split.removed.size(), 1u);
  EXPECT_EQ(split.removed[0].id, "a");
  EXPECT_EQ(split.kept.size(), 1u);
}

namespace {
std::vector<std::vector<std::string>> windows(const std::string& s, std::size_t w) {
  auto toks = split_whitespace(lowercase_ascii(s));
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i + w <= toks.size(); ++i) out.emplace_back(toks.begin() + i, toks.begin() + i + w);
  return out;
}

bool brute_overlap(const std::string& q, const std::vector<std::string>& bench) {
  const std::string nq = collapse_whitespace(lowercase_ascii(q));
  for (const auto& b : bench) {
    if (collapse_whitespace(lowercase_ascii(b)) == nq) return true;
    for (const auto& wq : windows(q, 13)) {
      for (const auto& wb : windows(b, 13)) {
        if (wq == wb) return true;
      }
    }
  }
  return false;
}
}  // namespace

TEST(Overlap, MatchesBruteForceOracle) {
  Rng rng(RngSeed{11});
  const std::vector<std::string> vocab{"a", "b", "c", "D"};
  auto sentence = [&](std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += (i ? (rng.coin() ? " " : "  \n") : "") + vocab[rng.below(2)];
    return s;
  };
  std::vector<std::string> bench;
  for (int i = 0; i < 5; ++i) bench.push_back(sentence(10 + rng.below(10)));
  std::size_t hits = 0;
  for (int i = 0; i < 300; ++i) {
    const std::string q = sentence(5 + rng.below(16));
    std::vector<QAPair> one{testsupport::qa("q", q)};
    const bool got = !overlap_filter(one, bench).removed.empty();
    ASSERT_EQ(got, brute_overlap(q, bench)) << q;
    hits += got;
  }
  EXPECT_GT(hits, 0u);
  EXPECT_LT(hits, 300u);
}
