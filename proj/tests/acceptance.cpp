// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Everything runs against in-process mocks; no network.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "judgeforge/cli/cli.hpp"
#include "judgeforge/dataset/dataset_builder.hpp"
#include "judgeforge/dpo/dpo_sampler.hpp"
#include "judgeforge/eval/eval_bench.hpp"
#include "judgeforge/loss/loss_lab.hpp"
#include "judgeforge/template_forge/rewrite.hpp"
#include "judgeforge/tournament/tournament.hpp"
#include "support.hpp"

using namespace judgeforge;
namespace fs = std::filesystem;

namespace {

// -ln sigma(x) at 40 digits (mpmath), for x = beta * delta.
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNegLogSigmaPos02 = 0.59813886938159183968;
constexpr double kNegLogSigmaNeg02 = 0.79813886938159183968;

struct Check {
  std::string name;
  std::function<bool(std::ostream&)> run;
};

loss::LogprobSeq seq(std::vector<double> v) { return loss::LogprobSeq(std::move(v)); }

loss::PreferencePairLogprobs margin_pair(double delta) {
  if (delta >= 0) return loss::PreferencePairLogprobs(seq({-3.0}), seq({-1.0}), seq({-3.0 - delta}), seq({-1.0}));
  return loss::PreferencePairLogprobs(seq({-3.0}), seq({-1.0}), seq({-3.0}), seq({-1.0 + delta}));
}

bool loss_values(std::ostream& d) {
  const std::vector zero{margin_pair(0.0)}, pos{margin_pair(2.0)}, neg{margin_pair(-2.0)};
  const double l0 = loss::dpo_loss(zero, 0.1), lp = loss::dpo_loss(pos, 0.1), ln = loss::dpo_loss(neg, 0.1);
  const loss::LossConfig cfg{0.2, 0.1};
  bool composed = true;
  for (const auto& b : {zero, pos, neg}) {
    composed &= loss::total_loss(b, cfg) == loss::dpo_loss(b, 0.1) + 0.2 * loss::nll_loss(b);
  }
  d << std::setprecision(10) << "dpo(0)=" << l0 << " dpo(+2)=" << lp << " dpo(-2)=" << ln
    << " total(0)=" << loss::total_loss(zero, cfg);
  return std::abs(l0 - kLn2) <= 1e-12 && std::abs(lp - kNegLogSigmaPos02) <= 1e-6 &&
         std::abs(ln - kNegLogSigmaNeg02) <= 1e-6 && composed &&
         std::abs(loss::total_loss(zero, cfg) - (kLn2 + 0.2 * 3.0)) <= 1e-12;
}

bool gradient_oracle(std::ostream& d) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng = Rng::derive(RngSeed{2024}, "grad:" + std::to_string(s));
    worst = std::max(worst, loss::grad_check(loss::synthetic_batch(rng), {}, 1e-5));
  }
  d << "batches=100 eps=1e-5 max_rel_error=" << worst;
  return worst < 1e-6;
}

bool tournament_correctness(std::ostream& d) {
  using namespace tournament;
  auto oracle = [](std::map<std::string, int> rank) -> MatchFn {
    return [rank](const std::string& x, const std::string& y) {
      return MatchRecord{x, y, rank.at(x) < rank.at(y) ? x : y, true, 2};
    };
  };
  std::size_t mismatches = 0, worst_pass = 0, cases = 0;
  auto check = [&](const std::vector<std::string>& ids, const std::vector<int>& q) {
    std::map<std::string, int> rank;
    std::vector<std::string> by_rank(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      rank[ids[i]] = q[i];
      by_rank[static_cast<std::size_t>(q[i])] = ids[i];
    }
    const auto m = oracle(rank);
    const auto best = select_extreme_two(ids, Direction::best, m);
    const auto worst = select_extreme_two(ids, Direction::worst, m);
    worst_pass = std::max({worst_pass, best.matches, worst.matches});
    const std::size_t n = ids.size();
    mismatches += best.first != by_rank[0] || best.second != by_rank[1] || worst.first != by_rank[n - 1] ||
                  worst.second != by_rank[n - 2];
    ++cases;
  };
  std::vector<int> q4{0, 1, 2, 3};
  do check(response_ids(4), q4);
  while (std::next_permutation(q4.begin(), q4.end()));
  Rng rng(RngSeed{16});
  for (int t = 0; t < 100; ++t) {
    std::vector<int> q(16);
    for (int i = 0; i < 16; ++i) q[static_cast<std::size_t>(i)] = i;
    rng.shuffle(q);
    check(response_ids(16), q);
  }
  d << "cases=" << cases << " mismatches=" << mismatches << " max_matches_per_pass=" << worst_pass;
  return cases == 124 && mismatches == 0 && worst_pass <= 36;
}

char chosen_slot(const std::string& p) { return p.find("CHOSEN") < p.find("REJECTED") ? 'A' : 'B'; }
char rejected_slot(const std::string& p) { return chosen_slot(p) == 'A' ? 'B' : 'A'; }

bool swap_truth_table(std::ostream& d) {
  using namespace judgment;
  struct Case {
    std::function<char(const std::string&, int)> judge;
    Classification cls;
    Route route;
  };
  const std::vector<Case> cases{
      {[](const std::string& p, int) { return chosen_slot(p); }, Classification::consistent_correct, Route::to_sft},
      {[](const std::string& p, int) { return rejected_slot(p); }, Classification::consistent_wrong,
       Route::to_dpo_pool},
      {[](const std::string&, int) { return 'A'; }, Classification::inconsistent, Route::to_dpo_pool},
      {[](const std::string&, int) { return '?'; }, Classification::unparseable, Route::discard}};
  constexpr int kN = 25;
  std::size_t ok = 0, total = 0;
  for (const auto& c : cases) {
    gateway::Gateway gw(testsupport::judge_mock(c.judge));
    for (int i = 0; i < kN; ++i) {
      const auto qa = testsupport::qa("q" + std::to_string(i), "Item " + std::to_string(i) + ": 2+" + std::to_string(i) + "?",
                                      "CHOSEN " + std::to_string(2 + i), "REJECTED " + std::to_string(3 + i));
      const auto out = swap_protocol(gw, forge::base_template(), qa, greedy_params("judge"));
      ok += out.classification == c.cls && route(out) == c.route;
      ++total;
    }
  }
  d << ok << "/" << total << " cases";
  return ok == total && total == 4 * kN;
}

bool sampling_law(std::ostream& d) {
  const auto cfg = forge::RewriteConfig::defaults();
  constexpr int kDraws = 100000;
  std::map<std::string, std::size_t> constraint, principle, output, lang;
  Rng rng(RngSeed{7});
  for (int i = 0; i < kDraws; ++i) {
    const auto o = forge::sample_rewrite_options(cfg, rng);
    ++constraint[o.constraint];
    ++principle[o.principle_format];
    ++output[o.output_format];
    ++lang[o.lang];
  }
  double worst = 0.0;
  std::size_t options = 0;
  auto compare = [&](const forge::OptionTable& t, std::map<std::string, std::size_t>& counts) {
    for (const auto& opt : t) {
      const double f = static_cast<double>(counts[opt.text]) / kDraws;
      worst = std::max(worst, std::abs(f - opt.probability));
      ++options;
    }
  };
  compare(cfg.constraints, constraint);
  compare(cfg.principle_formats, principle);
  compare(cfg.output_formats, output);
  compare(cfg.langs, lang);
  d << "draws=" << kDraws << " options=" << options << " max_abs_deviation=" << worst;
  return worst <= 0.01 && options > 0;
}

bool pipeline(std::ostream& d) {
  const auto t0 = std::chrono::steady_clock::now();
  // index -> behaviour: [0,60) correct, [60,85) slot A, [85,95) wrong, [95,100) no verdict
  auto decide = [](const std::string& p, int) {
    const auto at = p.find("Item ");
    const int i = std::stoi(p.substr(at + 5));
    if (i < 60) return chosen_slot(p);
    if (i < 85) return 'A';
    if (i < 95) return rejected_slot(p);
    return '?';
  };
  std::vector<QAPair> pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.push_back(testsupport::qa("qa" + std::to_string(i), "Item " + std::to_string(i) + ": what is " +
                                                                  std::to_string(i) + " squared?",
                                    "CHOSEN " + std::to_string(i * i), "REJECTED " + std::to_string(i * i + 1)));
  }
  const std::vector<forge::JudgeTemplate> templates{forge::base_template()};
  testsupport::TempDir dir;
  std::size_t provider_calls = 0;
  cli::JudgeStageOutput first;
  for (int run = 0; run < 2; ++run) {
    auto mock = testsupport::judge_mock(decide);
    gateway::Gateway gw(mock);
    auto out = cli::run_judge_stage(gw, templates, pairs, judgment::greedy_params("judge"), 4, RngSeed{99});
    cli::write_judge_outputs(out, dir / ("run" + std::to_string(run)));
    provider_calls += mock->call_count();
    if (run == 0) first = std::move(out);
  }
  const auto sft = first.with_route(judgment::Route::to_sft).size();
  const auto dpo = first.with_route(judgment::Route::to_dpo_pool).size();
  const auto discard = first.with_route(judgment::Route::discard).size();
  bool identical = true;
  for (const char* f : {"sft_pool.jsonl", "dpo_pool.jsonl", "discards.jsonl", "summary.txt"}) {
    identical &= testsupport::slurp(dir / "run0" / f) == testsupport::slurp(dir / "run1" / f);
  }
  const auto pool = read_records_strict<dpo::PoolItem>(dir / "run0" / "dpo_pool.jsonl");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  d << "sft=" << sft << " dpo=" << dpo << " discard=" << discard << " dpo_pool_file=" << pool.size()
    << " byte_identical=" << identical << " mock_calls=" << provider_calls << " seconds=" << secs;
  return sft == 60 && dpo == 35 && discard == 5 && pool.size() == 35 && identical && secs < 60;
}

bool dpo_pairs(std::ostream& d) {
  dpo::PoolItem item;
  item.id = "i";
  item.instruction.text = "instruction";
  item.instruction.qa_id = "q";
  item.ground_truth = Verdict::A;
  std::size_t emitted = 0, violations = 0, endpoint_pairs = 0;
  for (int code = 0; code < 729; ++code) {
    std::vector<Judgment> c(6);
    int x = code;
    bool all_a = true, all_b = true;
    for (auto& j : c) {
      j.verdict = x % 3 == 0 ? Verdict::A : x % 3 == 1 ? Verdict::B : Verdict::unparseable;
      j.raw = std::to_string(code) + ":" + std::string(to_string(j.verdict));
      all_a &= j.verdict == Verdict::A;
      all_b &= j.verdict == Verdict::B;
      x /= 3;
    }
    const auto rec = dpo::filter_and_pair(item, c);
    if ((all_a || all_b) && rec) ++endpoint_pairs;
    if (!rec) continue;
    ++emitted;
    violations += rec->chosen.verdict != Verdict::A || rec->rejected.verdict != Verdict::B;
  }
  d << "patterns=729 emitted=" << emitted << " violations=" << violations << " endpoint_pairs=" << endpoint_pairs;
  return violations == 0 && endpoint_pairs == 0 && emitted == 729 - 2 * 64 + 1;
}

bool length_and_mix(std::ostream& d) {
  using dataset::LengthClass;
  std::vector<LengthClass> classes;
  for (int i = 0; i < 7000; ++i) classes.push_back(LengthClass::chosen_longer);
  for (int i = 0; i < 3000; ++i) classes.push_back(LengthClass::rejected_longer);
  for (int i = 0; i < 500; ++i) classes.push_back(LengthClass::tie);
  Rng rng(RngSeed{5});
  rng.shuffle(classes);
  const auto kept = dataset::balance_length_indices(classes, rng);
  std::size_t cl = 0, rl = 0, ties = 0;
  for (auto i : kept) {
    cl += classes[i] == LengthClass::chosen_longer;
    rl += classes[i] == LengthClass::rejected_longer;
    ties += classes[i] == LengthClass::tie;
  }
  bool mix_ok = true;
  std::size_t mix_cases = 0;
  for (std::size_t j = 1; j <= 400; j += 13) {
    for (std::size_t g = 1; g <= 150; g += 7) {
      const auto m = dataset::mix_counts(j, g, {4, 1});
      const bool judge_limits = j <= 4 * g;
      mix_ok &= judge_limits ? (m.judge == j && m.general == j / 4) : (m.general == g && m.judge == 4 * g);
      ++mix_cases;
    }
  }
  d << "balanced chosen_longer=" << cl << " rejected_longer=" << rl << " ties=" << ties << "; mix cases=" << mix_cases;
  return cl == rl && cl == 3000 && ties == 500 && mix_ok;
}

bool eval_harness(std::ostream& d) {
  std::vector<BenchRecord> recs;
  for (int i = 0; i < 100; ++i) {
    recs.push_back({"b" + std::to_string(i), i % 2 ? "chat" : "reasoning", "Item " + std::to_string(i) + " prompt",
                    "CHOSEN " + std::to_string(i), "REJECTED " + std::to_string(i)});
  }
  auto scripted = [](const std::string& p, int) {
    const int i = std::stoi(p.substr(p.find("Item ") + 5));
    return i < 80 ? chosen_slot(p) : rejected_slot(p);
  };
  eval::EvalOptions o;
  o.model = "judge";
  o.record_weighted = true;
  gateway::Gateway gw(testsupport::judge_mock(scripted));
  Rng rng(RngSeed{1});
  const auto tmpl = eval::load_prompt_style(eval::PromptStyle::official_english);
  const auto r = eval::evaluate(gw, recs, tmpl, o, rng);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", r.average());
  gateway::Gateway gw_a(testsupport::judge_mock([](const std::string&, int) { return 'A'; }));
  o.mode = eval::Mode::both_order_strict;
  const auto strict = eval::evaluate(gw_a, recs, tmpl, o, rng);
  d << "scripted=" << buf << " always_A_strict=" << strict.average();
  return std::string(buf) == "0.8000" && r.average() == 0.8 && strict.average() == 0.0;
}

// Random text with newlines, quotes, escapes and multi-byte characters.
std::string rtext(Rng& rng, bool nonempty = true) {
  static const std::vector<std::string> atoms{"a", "Z", "7", " ", "\n", "\t", "\"", "\\", "{", "}", "/", "é", "ß",
                                              "中", "文", "ー", "🙂", "∑", "\r\n", "[[A]]", " "};
  const std::size_t n = rng.below(40) + (nonempty ? 1 : 0);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += atoms[rng.below(atoms.size())];
  return s;
}

template <class T, class Make>
bool round_trip(const fs::path& dir, Make make, std::ostream& d) {
  Rng rng(RngSeed{std::hash<std::string>{}(RecordSchema<T>::name)});
  std::vector<T> in;
  for (int i = 0; i < 1000; ++i) in.push_back(make(rng, "id" + std::to_string(i) + "·" + rtext(rng)));
  const fs::path p = dir / (std::string(RecordSchema<T>::name) + ".jsonl");
  write_records(in, p);
  const auto out = read_records_strict<T>(p);
  const bool ok = out == in;
  d << RecordSchema<T>::name << (ok ? "=ok " : "=MISMATCH ");
  return ok;
}

template <class E>
E pick(Rng& rng, std::initializer_list<E> xs) {
  return *(xs.begin() + rng.below(xs.size()));
}

GenParams rparams(Rng& rng) {
  GenParams p;
  p.model = rtext(rng);
  p.temperature = rng.uniform() * 2;
  p.top_p = rng.uniform();
  p.max_tokens = static_cast<int>(rng.below(4096)) + 1;
  if (rng.coin()) p.seed = rng.below(1u << 30);
  return p;
}

JudgeInstruction rinstruction(Rng& rng) {
  JudgeInstruction j;
  j.text = rtext(rng);
  j.qa_id = rtext(rng);
  j.order = pick(rng, {Order::chosen_first, Order::rejected_first});
  j.format_class = pick(rng, {OutputFormatClass::bracket_verdict, OutputFormatClass::json, OutputFormatClass::other});
  j.lang = pick(rng, {Lang::english, Lang::simplified_chinese});
  return j;
}

Judgment rjudgment(Rng& rng) {
  Judgment j;
  j.raw = rtext(rng, false);
  j.cot = rtext(rng, false);
  j.verdict = pick(rng, {Verdict::A, Verdict::B, Verdict::unparseable});
  j.gen_params = rparams(rng);
  return j;
}

QAPair rqa(Rng& rng, std::string id) {
  QAPair q;
  q.id = std::move(id);
  q.question = rtext(rng);
  q.chosen = "c" + rtext(rng, false);
  q.rejected = "r" + rtext(rng, false);
  q.source = pick(rng, {Source::math_prm, Source::skywork_subset, Source::general_chat, Source::synthetic_test});
  q.has_ground_truth = rng.coin();
  return q;
}

std::vector<double> rlogprobs(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = -rng.uniform() * 10;
  return v;
}

bool persistence(std::ostream& d) {
  testsupport::TempDir dir;
  bool ok = true;
  ok &= round_trip<QAPair>(dir.path(), rqa, d);
  ok &= round_trip<SftRecord>(dir.path(), [](Rng& rng, std::string id) {
    SftRecord r;
    r.id = std::move(id);
    r.kind = pick(rng, {RecordKind::judge, RecordKind::general, RecordKind::policy});
    r.instruction = rinstruction(rng);
    r.target = rjudgment(rng);
    if (rng.coin()) r.swapped_target = rtext(rng, false);
    return r;
  }, d);
  ok &= round_trip<DpoRecord>(dir.path(), [](Rng& rng, std::string id) {
    DpoRecord r;
    r.id = std::move(id);
    r.kind = pick(rng, {RecordKind::judge, RecordKind::policy});
    r.instruction = rinstruction(rng);
    r.chosen = rjudgment(rng);
    r.rejected = rjudgment(rng);
    return r;
  }, d);
  ok &= round_trip<BenchRecord>(dir.path(), [](Rng& rng, std::string id) {
    return BenchRecord{std::move(id), rtext(rng), rtext(rng), "c" + rtext(rng, false), "r" + rtext(rng, false)};
  }, d);
  ok &= round_trip<judgment::RoutedItem>(dir.path(), [](Rng& rng, std::string id) {
    judgment::RoutedItem r;
    r.qa = rqa(rng, id);
    r.outcome.qa_id = id;
    r.outcome.classification = pick(rng, {judgment::Classification::consistent_correct,
                                          judgment::Classification::consistent_wrong,
                                          judgment::Classification::inconsistent, judgment::Classification::unparseable});
    r.outcome.forward_instruction = rinstruction(rng);
    r.outcome.swapped_instruction = rinstruction(rng);
    r.outcome.judgment_forward = rjudgment(rng);
    r.outcome.judgment_swapped = rjudgment(rng);
    r.route = judgment::route(r.outcome.classification);
    return r;
  }, d);
  ok &= round_trip<dpo::PoolItem>(dir.path(), [](Rng& rng, std::string id) {
    return dpo::PoolItem{std::move(id), rinstruction(rng), pick(rng, {Verdict::A, Verdict::B})};
  }, d);
  ok &= round_trip<dataset::GeneralChatRecord>(dir.path(), [](Rng& rng, std::string id) {
    return dataset::GeneralChatRecord{std::move(id), rtext(rng), rtext(rng)};
  }, d);
  ok &= round_trip<forge::TemplateRecord>(dir.path(), [](Rng& rng, std::string id) {
    std::optional<forge::RewriteOptions> options;
    if (rng.coin()) options = forge::RewriteOptions{rtext(rng), rtext(rng), rtext(rng), rtext(rng)};
    return forge::TemplateRecord{std::move(id), forge::base_template(), std::move(options),
                                 static_cast<int>(rng.below(4))};
  }, d);
  ok &= round_trip<tournament::TournamentPrompt>(dir.path(), [](Rng& rng, std::string id) {
    tournament::TournamentPrompt p{std::move(id), rtext(rng), {}};
    for (int i = 0; i < 16; ++i) p.responses.push_back(std::to_string(i) + rtext(rng));
    return p;
  }, d);
  ok &= round_trip<loss::PreferencePairLogprobs>(dir.path(), [](Rng& rng, std::string) {
    const std::size_t c = rng.below(8) + 1, r = rng.below(8) + 1;
    return loss::PreferencePairLogprobs(seq(rlogprobs(rng, c)), seq(rlogprobs(rng, r)), seq(rlogprobs(rng, c)),
                                        seq(rlogprobs(rng, r)));
  }, d);
  return ok;
}

}  // namespace

int main() {
  const std::vector<Check> checks{
      {"loss values", loss_values},
      {"gradient oracle", gradient_oracle},
      {"tournament correctness", tournament_correctness},
      {"swap-protocol truth table", swap_truth_table},
      {"rewrite sampling law", sampling_law},
      {"pipeline end-to-end (mock)", pipeline},
      {"dpo pair construction", dpo_pairs},
      {"length balance and mixing", length_and_mix},
      {"eval harness", eval_harness},
      {"round-trip persistence", persistence},
  };
  int failures = 0;
  for (const auto& c : checks) {
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail << " exception: " << e.what();
    }
    failures += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << c.name << "  (" << detail.str() << ")\n";
  }
  std::cout << (checks.size() - static_cast<std::size_t>(failures)) << "/" << checks.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
