#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "judgeforge/core/records.hpp"
#include "judgeforge/core/rng.hpp"
#include "judgeforge/gateway/gateway.hpp"
#include "judgeforge/template_forge/template.hpp"

namespace judgeforge::tournament {

enum class Direction { best, worst };

// One played match. winner is the response the judge preferred; in a
// worst-direction bracket the other id advances.
struct MatchRecord {
  std::string x;
  std::string y;
  std::string winner;
  bool swap_agreement = true;
  int judge_calls = 0;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

using MatchFn = std::function<MatchRecord(const std::string& x, const std::string& y)>;

struct ExtremeTwo {
  std::string first;   // champion
  std::string second;  // playoff winner among the champion's victims
  std::size_t matches = 0;
};

// Single-elimination bracket seeded by input order (padded with byes to the
// next power of two), then a playoff over the champion's victims in the
// order they were eliminated. n >= 4.
ExtremeTwo select_extreme_two(std::span<const std::string> ids, Direction direction, const MatchFn& match);

struct Contender {
  std::string id;
  std::string text;
};

// Judges (x, y) and (y, x). Agreement decides; otherwise one rematch with a
// shifted seed, then a coin flip from rng logged with swap_agreement=false.
MatchRecord run_match(gateway::Gateway& gw, std::string_view prompt, const Contender& x,
                      const Contender& y, const forge::JudgeTemplate& tmpl, Rng& rng,
                      const GenParams& params);

struct TournamentResult {
  std::array<std::string, 2> best_two;
  std::array<std::string, 2> worst_two;
  std::vector<MatchRecord> match_log;
  std::size_t judge_call_count = 0;
};

class TournamentRejected : public std::runtime_error {
 public:
  TournamentRejected(const std::string& what, TournamentResult result)
      : std::runtime_error(what), result_(std::move(result)) {}
  const TournamentResult& result() const { return result_; }

 private:
  TournamentResult result_;
};

// Response ids are "r0".."r{n-1}" in input order.
std::vector<std::string> response_ids(std::size_t n);

// Best pass then worst pass over the same ids with the given comparator.
// Throws TournamentRejected when the two extremes intersect.
TournamentResult run_tournament(std::span<const std::string> ids, const MatchFn& match);

// Full annotation over 16 distinct responses.
TournamentResult annotate(gateway::Gateway& gw, std::string_view prompt,
                          std::span<const std::string> responses, const forge::JudgeTemplate& tmpl,
                          Rng& rng, const GenParams& params);

// Recomputes a result from its log alone; throws std::runtime_error if the
// log does not match the bracket schedule.
TournamentResult replay(std::span<const std::string> ids, std::span<const MatchRecord> log);

enum class Pairing {
  cross,     // (best1, worst1) and (best2, worst2)
  top_only,  // (best1, worst1)
};

struct TournamentPrompt {
  std::string id;
  std::string prompt;
  std::vector<std::string> responses;

  friend bool operator==(const TournamentPrompt&, const TournamentPrompt&) = default;
};

std::vector<DpoRecord> policy_pairs(const TournamentPrompt& input, const TournamentResult& result,
                                    Pairing pairing = Pairing::cross);

}  // namespace judgeforge::tournament

namespace judgeforge {
template <>
struct RecordSchema<tournament::TournamentPrompt> {
  static constexpr const char* name = "tournament_prompt";
  static Json encode(const tournament::TournamentPrompt& r);
  static tournament::TournamentPrompt decode(const Json& j);
  static const std::string& key(const tournament::TournamentPrompt& r) { return r.id; }
};
}  // namespace judgeforge
