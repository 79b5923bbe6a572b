#include "judgeforge/tournament/tournament.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "judgeforge/judgment/judgment.hpp"

namespace judgeforge::tournament {

namespace {

const std::string& advancing(const MatchRecord& m, Direction d) {
  if (d == Direction::best) return m.winner;
  return m.winner == m.x ? m.y : m.x;
}

std::optional<std::string> id_for(Verdict v, const std::string& slot_a, const std::string& slot_b) {
  if (v == Verdict::A) return slot_a;
  if (v == Verdict::B) return slot_b;
  return std::nullopt;
}

}  // namespace

ExtremeTwo select_extreme_two(std::span<const std::string> ids, Direction direction, const MatchFn& match) {
  if (ids.size() < 4) throw std::invalid_argument("select_extreme_two: need at least 4 responses");
  std::size_t slots = 1;
  while (slots < ids.size()) slots <<= 1;

  struct Entrant {
    std::string id;
    std::vector<std::string> victims;  // in elimination order
  };
  std::vector<std::optional<Entrant>> round;
  for (std::size_t i = 0; i < slots; ++i) {
    if (i < ids.size()) {
      round.push_back(Entrant{ids[i], {}});
    } else {
      round.push_back(std::nullopt);  // bye
    }
  }

  ExtremeTwo out;
  while (round.size() > 1) {
    std::vector<std::optional<Entrant>> next;
    for (std::size_t i = 0; i < round.size(); i += 2) {
      auto& a = round[i];
      auto& b = round[i + 1];
      if (!a || !b) {
        next.push_back(a ? std::move(a) : std::move(b));
        continue;
      }
      const MatchRecord m = match(a->id, b->id);
      ++out.matches;
      if (m.winner != a->id && m.winner != b->id) {
        throw std::runtime_error("match winner '" + m.winner + "' is not a participant");
      }
      const bool a_advances = advancing(m, direction) == a->id;
      Entrant& w = a_advances ? *a : *b;
      const Entrant& l = a_advances ? *b : *a;
      w.victims.push_back(l.id);
      next.push_back(std::move(w));
    }
    round = std::move(next);
  }
  const Entrant& champion = *round.front();
  out.first = champion.id;
  std::string current = champion.victims.front();
  for (std::size_t i = 1; i < champion.victims.size(); ++i) {
    const MatchRecord m = match(current, champion.victims[i]);
    ++out.matches;
    current = advancing(m, direction);
  }
  out.second = current;
  return out;
}

MatchRecord run_match(gateway::Gateway& gw, std::string_view prompt, const Contender& x,
                      const Contender& y, const forge::JudgeTemplate& tmpl, Rng& rng,
                      const GenParams& params) {
  if (x.text == y.text) throw PreconditionError("run_match: responses must differ");
  MatchRecord rec{x.id, y.id, {}, true, 0};
  const std::uint64_t base_seed = params.seed.value_or(0);
  for (int attempt = 0; attempt < 2; ++attempt) {
    GenParams p = params;
    if (attempt > 0) p.seed = base_seed + static_cast<std::uint64_t>(attempt);
    const auto fwd = gw.complete(gateway::single_user_request(p, judgment::render_pair(tmpl, prompt, x.text, y.text)));
    const auto swp = gw.complete(gateway::single_user_request(p, judgment::render_pair(tmpl, prompt, y.text, x.text)));
    rec.judge_calls += 2;
    const auto cls = tmpl.output_format_class();
    const auto first = id_for(judgment::parse_verdict(fwd.texts.front(), cls), x.id, y.id);
    const auto second = id_for(judgment::parse_verdict(swp.texts.front(), cls), y.id, x.id);
    if (first && second && *first == *second) {
      rec.winner = *first;
      return rec;
    }
  }
  rec.winner = rng.coin() ? x.id : y.id;
  rec.swap_agreement = false;
  return rec;
}

std::vector<std::string> response_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("r" + std::to_string(i));
  return ids;
}

TournamentResult run_tournament(std::span<const std::string> ids, const MatchFn& match) {
  TournamentResult result;
  const MatchFn logged = [&](const std::string& x, const std::string& y) {
    MatchRecord m = match(x, y);
    result.judge_call_count += static_cast<std::size_t>(m.judge_calls);
    result.match_log.push_back(m);
    return m;
  };
  const ExtremeTwo best = select_extreme_two(ids, Direction::best, logged);
  const ExtremeTwo worst = select_extreme_two(ids, Direction::worst, logged);
  result.best_two = {best.first, best.second};
  result.worst_two = {worst.first, worst.second};
  const std::set<std::string> top(result.best_two.begin(), result.best_two.end());
  for (const auto& id : result.worst_two) {
    if (top.contains(id)) {
      const std::string what = "best and worst selections intersect at '" + id + "' (inconsistent judge)";
      throw TournamentRejected(what, std::move(result));
    }
  }
  return result;
}

TournamentResult annotate(gateway::Gateway& gw, std::string_view prompt,
                          std::span<const std::string> responses, const forge::JudgeTemplate& tmpl,
                          Rng& rng, const GenParams& params) {
  if (responses.size() != 16) throw PreconditionError("annotate: expected 16 responses");
  const std::set<std::string> distinct(responses.begin(), responses.end());
  if (distinct.size() != responses.size()) throw PreconditionError("annotate: responses must be distinct");
  const auto ids = response_ids(responses.size());
  auto text_of = [&](const std::string& id) -> const std::string& {
    return responses[static_cast<std::size_t>(std::stoul(id.substr(1)))];
  };
  return run_tournament(ids, [&](const std::string& x, const std::string& y) {
    return run_match(gw, prompt, {x, text_of(x)}, {y, text_of(y)}, tmpl, rng, params);
  });
}

TournamentResult replay(std::span<const std::string> ids, std::span<const MatchRecord> log) {
  std::size_t cursor = 0;
  return run_tournament(ids, [&](const std::string& x, const std::string& y) {
    if (cursor >= log.size()) throw std::runtime_error("replay: match log exhausted");
    const MatchRecord& m = log[cursor++];
    if (m.x != x || m.y != y) {
      throw std::runtime_error("replay: log entry " + std::to_string(cursor - 1) + " is (" + m.x +
                               "," + m.y + "), schedule expects (" + x + "," + y + ")");
    }
    return m;
  });
}

std::vector<DpoRecord> policy_pairs(const TournamentPrompt& input, const TournamentResult& result,
                                    Pairing pairing) {
  auto text_of = [&](const std::string& id) -> const std::string& {
    return input.responses.at(static_cast<std::size_t>(std::stoul(id.substr(1))));
  };
  auto as_judgment = [](const std::string& text) {
    Judgment j;
    j.raw = text;
    j.cot = text;
    return j;
  };
  std::vector<DpoRecord> out;
  const std::size_t n = pairing == Pairing::cross ? 2 : 1;
  for (std::size_t i = 0; i < n; ++i) {
    DpoRecord r;
    r.id = input.id + "#" + std::to_string(i);
    r.kind = RecordKind::policy;
    r.instruction.text = input.prompt;
    r.instruction.qa_id = input.id;
    r.chosen = as_judgment(text_of(result.best_two[i]));
    r.rejected = as_judgment(text_of(result.worst_two[i]));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace judgeforge::tournament

namespace judgeforge {

Json RecordSchema<tournament::TournamentPrompt>::encode(const tournament::TournamentPrompt& r) {
  return Json{{"id", r.id}, {"prompt", r.prompt}, {"responses", r.responses}};
}

tournament::TournamentPrompt RecordSchema<tournament::TournamentPrompt>::decode(const Json& j) {
  tournament::TournamentPrompt r;
  r.id = json_field::nonempty_string(j, "id");
  r.prompt = json_field::nonempty_string(j, "prompt");
  const Json& rs = json_field::require(j, "responses");
  if (!rs.is_array()) throw SchemaError("responses", "expected array of strings");
  for (const Json& s : rs) {
    if (!s.is_string()) throw SchemaError("responses", "expected array of strings");
    r.responses.push_back(s.get<std::string>());
  }
  return r;
}

}  // namespace judgeforge
