#include "judgeforge/cli/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "judgeforge/core/overlap.hpp"
#include "judgeforge/dataset/dataset_builder.hpp"
#include "judgeforge/eval/eval_bench.hpp"
#include "judgeforge/gateway/http_provider.hpp"
#include "judgeforge/gateway/mock_provider.hpp"
#include "judgeforge/loss/loss_lab.hpp"
#include "judgeforge/template_forge/rewrite.hpp"
#include "judgeforge/tournament/tournament.hpp"

namespace judgeforge::cli {

namespace fs = std::filesystem;

std::shared_ptr<gateway::Provider> make_provider(const Settings& settings,
                                                 const std::optional<fs::path>& mock_script) {
  if (mock_script) return gateway::MockProvider::from_script_file(*mock_script);
  gateway::HttpProviderConfig cfg;
  cfg.base_url = settings.base_url;
  if (const char* key = std::getenv(settings.api_key_env.c_str())) cfg.api_key = key;
  cfg.timeout = std::chrono::seconds(settings.timeout_s);
  cfg.supports_n = settings.supports_n;
  return std::make_shared<gateway::HttpProvider>(cfg);
}

gateway::GatewayConfig gateway_config(const Settings& settings) {
  gateway::GatewayConfig cfg;
  cfg.retry.max_attempts = settings.max_attempts;
  if (!settings.cache_dir.empty()) cfg.cache_dir = fs::path(settings.cache_dir);
  cfg.requests_per_second = settings.requests_per_second;
  return cfg;
}

std::vector<std::string> read_benchmark_questions(const fs::path& path) {
  std::vector<std::string> out;
  const auto lines = detail::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(lines[i]);
    } catch (const Json::exception& e) {
      throw SchemaError("<json>", path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    const char* field = j.contains("question") ? "question" : "prompt";
    if (!j.is_object() || !j.contains(field) || !j[field].is_string()) {
      throw SchemaError("question", path.string() + ":" + std::to_string(i + 1) + ": missing question");
    }
    out.push_back(j[field].get<std::string>());
  }
  return out;
}

std::vector<judgment::RoutedItem> JudgeStageOutput::with_route(judgment::Route r) const {
  std::vector<judgment::RoutedItem> out;
  for (const auto& item : routed) {
    if (item.route == r) out.push_back(item);
  }
  return out;
}

std::string JudgeStageOutput::summary() const {
  using judgment::Classification;
  using judgment::Route;
  std::map<Classification, std::size_t> by_class;
  std::map<Route, std::size_t> by_route;
  for (const auto& item : routed) {
    ++by_class[item.outcome.classification];
    ++by_route[item.route];
  }
  std::ostringstream os;
  os << "judged " << routed.size() << " pairs (overlap removed " << overlap_removed.size() << ")\n";
  for (auto c : {Classification::consistent_correct, Classification::consistent_wrong,
                 Classification::inconsistent, Classification::unparseable}) {
    os << "  " << judgment::to_string(c) << " " << by_class[c] << "\n";
  }
  for (auto r : {Route::to_sft, Route::to_dpo_pool, Route::discard}) {
    os << "  " << judgment::to_string(r) << " " << by_route[r] << "\n";
  }
  return os.str();
}

std::vector<std::size_t> assign_templates(std::span<const QAPair> pairs, std::size_t template_count,
                                          RngSeed seed) {
  if (template_count == 0) throw std::invalid_argument("assign_templates: no templates");
  std::vector<std::size_t> idx;
  idx.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (template_count == 1) {
      idx.push_back(0);
    } else {
      idx.push_back(static_cast<std::size_t>(Rng::derive(seed, "template:" + p.id).below(template_count)));
    }
  }
  return idx;
}

JudgeStageOutput run_judge_stage(gateway::Gateway& gw, std::span<const forge::JudgeTemplate> templates,
                                 std::span<const QAPair> pairs, const GenParams& params,
                                 std::size_t max_in_flight, RngSeed seed,
                                 std::span<const std::string> benchmark_questions) {
  JudgeStageOutput out;
  OverlapSplit split = overlap_filter(pairs, benchmark_questions);
  out.overlap_removed = std::move(split.removed);
  const auto idx = assign_templates(split.kept, templates.size(), seed);
  std::vector<forge::JudgeTemplate> per_pair;
  per_pair.reserve(idx.size());
  for (std::size_t i : idx) per_pair.push_back(templates[i]);
  auto outcomes = judgment::swap_protocol_batch(gw, per_pair, split.kept, params, max_in_flight);
  out.routed.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto r = judgment::route(outcomes[i]);
    out.routed.push_back({split.kept[i], std::move(outcomes[i]), r});
  }
  return out;
}

void write_judge_outputs(const JudgeStageOutput& output, const fs::path& dir) {
  using judgment::Route;
  write_records(output.with_route(Route::to_sft), dir / "sft_pool.jsonl");
  write_records(dpo::pool_from_routed(output.routed), dir / "dpo_pool.jsonl");
  write_records(output.with_route(Route::discard), dir / "discards.jsonl");
  detail::write_lines({output.summary()}, dir / "summary.txt");
}

namespace {

// Options shared by every subcommand.
struct Common {
  std::optional<std::string> config_path;
  std::optional<std::string> mock;
  bool dry_run = false;
  FlagOverrides flags;
};

template <class T>
void add_opt(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& desc) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, desc);
}

void add_common(CLI::App* app, Common& c) {
  add_opt(app, "--seed", c.flags.seed, "Seed for every random choice");
  add_opt(app, "--config", c.config_path, "JSON config file keyed by module");
  app->add_flag("--dry-run", c.dry_run, "Print the plan; no requests, no output files");
  add_opt(app, "--mock", c.mock, "Mock provider script (JSON) instead of the HTTP endpoint");
}

void add_gateway_flags(CLI::App* app, Common& c) {
  add_opt(app, "--base-url", c.flags.base_url, "OpenAI-compatible endpoint");
  add_opt(app, "--cache-dir", c.flags.cache_dir, "On-disk response cache");
  add_opt(app, "--max-in-flight", c.flags.max_in_flight, "Concurrent requests");
  add_opt(app, "--model", c.flags.model, "Model for this stage");
}

struct Context {
  const Common& common;
  const Settings& settings;
  std::ostream& out;
  std::ostream& err;

  std::optional<fs::path> mock() const {
    if (common.mock) return fs::path(*common.mock);
    return std::nullopt;
  }
};

struct Session {
  std::shared_ptr<gateway::Provider> provider;
  std::unique_ptr<gateway::Gateway> gw;
};

Session open_session(const Context& ctx) {
  Session s;
  s.provider = make_provider(ctx.settings, ctx.mock());
  if (!ctx.mock() && !std::getenv(ctx.settings.api_key_env.c_str())) {
    ctx.err << "warning: " << ctx.settings.api_key_env << " is not set; sending requests without a key\n";
  }
  s.gw = std::make_unique<gateway::Gateway>(s.provider, gateway_config(ctx.settings));
  return s;
}

void print_traffic(const Context& ctx, const gateway::Gateway& gw) {
  ctx.out << "gateway: " << gw.provider_calls() << " provider calls, " << gw.cache_hits() << " cache hits\n";
}

void print_plan(const Context& ctx, const std::string& command, std::size_t requests,
                const std::string& detail = {}) {
  ctx.out << "plan: " << command << " planned_requests=" << requests;
  if (!detail.empty()) ctx.out << " " << detail;
  ctx.out << "\n";
}

fs::path sidecar(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

// rewrite ------------------------------------------------------------------

struct RewriteArgs {
  int count = 1;
  std::string out = "templates.jsonl";
  bool include_base = false;
};

int cmd_rewrite(const Context& ctx, const RewriteArgs& a) {
  const Settings& s = ctx.settings;
  s.rewrite_tables.validate();
  if (a.count < 0) throw std::invalid_argument("--count must be >= 0");
  std::vector<forge::RewriteOptions> options;
  for (int i = 0; i < a.count; ++i) {
    Rng rng = Rng::derive(RngSeed{s.seed}, "rewrite:" + std::to_string(i));
    options.push_back(forge::sample_rewrite_options(s.rewrite_tables, rng));
  }
  if (ctx.common.dry_run) {
    std::map<std::string, std::size_t> langs;
    for (const auto& o : options) ++langs[o.lang];
    std::ostringstream d;
    d << "max_with_retries=" << static_cast<std::size_t>(a.count) * s.rewrite_max_attempts;
    for (const auto& [lang, n] : langs) d << " lang[" << lang << "]=" << n;
    print_plan(ctx, "rewrite", options.size(), d.str());
    return kExitOk;
  }
  Session session = open_session(ctx);
  std::vector<forge::TemplateRecord> records;
  if (a.include_base) {
    records.push_back({"base", forge::base_template(), std::nullopt, 0});
  }
  std::size_t failures = 0;
  for (int i = 0; i < a.count; ++i) {
    GenParams params;
    params.model = s.rewrite_model;
    params.temperature = s.rewrite_temperature;
    params.max_tokens = s.max_tokens;
    params.seed = s.seed + static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(s.rewrite_max_attempts);
    try {
      auto r = forge::rewrite_template(*session.gw, s.rewrite_tables, options[static_cast<std::size_t>(i)],
                                       s.rewrite_max_attempts, params);
      records.push_back({"t" + std::to_string(i), std::move(r.judge_template), std::move(r.options), r.attempts});
    } catch (const forge::RewriteFailure& e) {
      ++failures;
      ctx.err << "rewrite t" << i << " discarded: " << e.what() << "\n";
    }
  }
  write_records(records, a.out);
  ctx.out << "wrote " << records.size() << " templates to " << a.out << " (" << failures << " discarded)\n";
  print_traffic(ctx, *session.gw);
  return kExitOk;
}

// judge --------------------------------------------------------------------

struct JudgeArgs {
  std::string qa;
  std::string out_dir = "judged";
  std::optional<std::string> templates;
  std::optional<std::string> benchmark;
};

std::vector<forge::JudgeTemplate> load_templates(const std::optional<std::string>& path) {
  std::vector<forge::JudgeTemplate> out;
  if (!path) {
    out.push_back(forge::base_template());
    return out;
  }
  for (auto& r : read_records_strict<forge::TemplateRecord>(*path)) out.push_back(std::move(r.judge_template));
  if (out.empty()) throw std::invalid_argument("template file " + *path + " is empty");
  return out;
}

int cmd_judge(const Context& ctx, const JudgeArgs& a) {
  const Settings& s = ctx.settings;
  const auto pairs = read_records_strict<QAPair>(a.qa);
  const auto templates = load_templates(a.templates);
  std::vector<std::string> bench;
  if (a.benchmark) bench = read_benchmark_questions(*a.benchmark);
  if (ctx.common.dry_run) {
    const auto split = overlap_filter(pairs, bench);
    std::ostringstream d;
    d << "pairs=" << pairs.size() << " overlap_removed=" << split.removed.size()
      << " templates=" << templates.size();
    print_plan(ctx, "judge", split.kept.size() * 2, d.str());
    return kExitOk;
  }
  Session session = open_session(ctx);
  GenParams params;
  params.model = s.judge_model;
  params.temperature = s.judge_temperature;
  params.top_p = s.judge_top_p;
  params.max_tokens = s.max_tokens;
  params.seed = s.seed;
  const auto output =
      run_judge_stage(*session.gw, templates, pairs, params, s.max_in_flight, RngSeed{s.seed}, bench);
  write_judge_outputs(output, a.out_dir);
  ctx.out << output.summary();
  ctx.out << "wrote sft_pool.jsonl, dpo_pool.jsonl, discards.jsonl, summary.txt to " << a.out_dir << "\n";
  print_traffic(ctx, *session.gw);
  return kExitOk;
}

// build-sft ----------------------------------------------------------------

struct BuildSftArgs {
  std::string pool;
  std::string out = "sft.jsonl";
  std::optional<std::string> general;
  std::optional<std::string> benchmark;
};

int cmd_build_sft(const Context& ctx, const BuildSftArgs& a) {
  const Settings& s = ctx.settings;
  const auto routed = read_records_strict<judgment::RoutedItem>(a.pool);
  std::vector<dataset::GeneralChatRecord> general;
  if (a.general) general = read_records_strict<dataset::GeneralChatRecord>(*a.general);
  dataset::SftBuildOptions opts;
  opts.ratio = s.ratio;
  if (general.empty() && opts.ratio) {
    ctx.err << "note: no general data; mixing disabled\n";
    opts.ratio.reset();
  }
  if (a.benchmark) opts.benchmark_questions = read_benchmark_questions(*a.benchmark);
  const auto result = dataset::emit_sft(routed, general, opts, RngSeed{s.seed});
  if (ctx.common.dry_run) {
    print_plan(ctx, "build-sft", 0, "records=" + std::to_string(result.records.size()));
    ctx.out << result.report.to_text();
    return kExitOk;
  }
  write_records(result.records, a.out);
  detail::write_lines({result.report.to_text()}, sidecar(a.out, ".summary.txt"));
  ctx.out << result.report.to_text();
  ctx.out << "wrote " << result.records.size() << " records to " << a.out << "\n";
  return kExitOk;
}

// sample-dpo ---------------------------------------------------------------

struct SampleDpoArgs {
  std::string pool;
  std::string out = "dpo.jsonl";
  std::optional<std::string> report;
};

int cmd_sample_dpo(const Context& ctx, const SampleDpoArgs& a) {
  const Settings& s = ctx.settings;
  const auto pool = read_records_strict<dpo::PoolItem>(a.pool);
  dpo::SamplerOptions opts;
  opts.params.model = s.sampler_model;
  opts.params.k = s.sampler_k;
  opts.params.temperature = s.sampler_temperature;
  opts.params.max_tokens = s.max_tokens;
  opts.params.seed = s.seed;
  opts.all_pairs = s.sampler_all_pairs;
  opts.max_pairs_per_instruction = s.sampler_max_pairs;
  if (ctx.common.dry_run) {
    const auto provider = make_provider(s, ctx.mock());
    std::size_t planned = 0;
    for (const auto& item : pool) planned += dpo::candidate_requests(*provider, item.instruction, opts.params).size();
    print_plan(ctx, "sample-dpo", planned,
               "instructions=" + std::to_string(pool.size()) + " k=" + std::to_string(s.sampler_k));
    return kExitOk;
  }
  Session session = open_session(ctx);
  const auto result = dpo::run_sampler(*session.gw, pool, opts);
  write_records(result.records, a.out);
  const fs::path report = a.report ? fs::path(*a.report) : sidecar(a.out, ".yield.txt");
  detail::write_lines({result.report.to_text()}, report);
  ctx.out << result.report.to_text();
  ctx.out << "wrote " << result.records.size() << " pairs to " << a.out << "\n";
  print_traffic(ctx, *session.gw);
  return kExitOk;
}

// tournament ---------------------------------------------------------------

struct TournamentArgs {
  std::string input;
  std::string out = "policy_pairs.jsonl";
  std::optional<std::string> log;
  std::optional<std::string> style;
};

// Upper bound on matches for one extreme-pair pass over n entrants.
std::size_t max_matches_per_pass(std::size_t n) {
  std::size_t rounds = 0;
  while ((std::size_t{1} << rounds) < n) ++rounds;
  return (n - 1) + (rounds > 0 ? rounds - 1 : 0);
}

Json match_log_json(const tournament::TournamentPrompt& p, const tournament::TournamentResult& r, bool rejected) {
  Json matches = Json::array();
  for (const auto& m : r.match_log) {
    matches.push_back(
        {{"x", m.x}, {"y", m.y}, {"winner", m.winner}, {"swap_agreement", m.swap_agreement}, {"judge_calls", m.judge_calls}});
  }
  return Json{{"id", p.id},
              {"rejected", rejected},
              {"best_two", r.best_two},
              {"worst_two", r.worst_two},
              {"judge_calls", r.judge_call_count},
              {"matches", std::move(matches)}};
}

int cmd_tournament(const Context& ctx, const TournamentArgs& a) {
  const Settings& s = ctx.settings;
  const auto prompts = read_records_strict<tournament::TournamentPrompt>(a.input);
  const forge::JudgeTemplate tmpl = a.style ? eval::load_prompt_style(*a.style) : forge::base_template();
  if (ctx.common.dry_run) {
    std::size_t min_calls = 0, max_calls = 0;
    for (const auto& p : prompts) {
      const std::size_t m = 2 * max_matches_per_pass(p.responses.size());
      min_calls += 2 * m;
      max_calls += 4 * m;
    }
    print_plan(ctx, "tournament", max_calls,
               "(upper bound; at least " + std::to_string(min_calls) + ") prompts=" + std::to_string(prompts.size()));
    return kExitOk;
  }
  Session session = open_session(ctx);
  GenParams params = judgment::greedy_params(s.tournament_model);
  params.max_tokens = s.max_tokens;
  params.seed = s.seed;
  std::vector<DpoRecord> pairs;
  std::vector<std::string> log_lines;
  std::size_t rejected = 0;
  for (const auto& p : prompts) {
    Rng rng = Rng::derive(RngSeed{s.seed}, "tournament:" + p.id);
    try {
      const auto result = tournament::annotate(*session.gw, p.prompt, p.responses, tmpl, rng, params);
      for (auto& r : tournament::policy_pairs(p, result, s.pairing)) pairs.push_back(std::move(r));
      log_lines.push_back(detail::dump_line(match_log_json(p, result, false)));
    } catch (const tournament::TournamentRejected& e) {
      ++rejected;
      ctx.err << "prompt " << p.id << " rejected: " << e.what() << "\n";
      log_lines.push_back(detail::dump_line(match_log_json(p, e.result(), true)));
    }
  }
  write_records(pairs, a.out);
  detail::write_lines(log_lines, a.log ? fs::path(*a.log) : sidecar(a.out, ".matches.jsonl"));
  ctx.out << "prompts " << prompts.size() << ", rejected " << rejected << ", pairs " << pairs.size() << "\n";
  print_traffic(ctx, *session.gw);
  return kExitOk;
}

// eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string bench;
  std::optional<std::string> out;
};

int cmd_eval(const Context& ctx, const EvalArgs& a) {
  const Settings& s = ctx.settings;
  const auto records = read_records_strict<BenchRecord>(a.bench);
  const auto tmpl = eval::load_prompt_style(s.eval_style);
  if (ctx.common.dry_run) {
    const std::size_t per = s.eval_mode == eval::Mode::single_order ? 1 : 2;
    print_plan(ctx, "eval", records.size() * per,
               "records=" + std::to_string(records.size()) + " mode=" + std::string(eval::to_string(s.eval_mode)));
    return kExitOk;
  }
  Session session = open_session(ctx);
  eval::EvalOptions opts;
  opts.mode = s.eval_mode;
  opts.model = s.eval_model;
  opts.prompt_style = s.eval_style;
  opts.record_weighted = s.eval_record_weighted;
  opts.max_in_flight = s.max_in_flight;
  opts.max_tokens = s.max_tokens;
  Rng rng = Rng::derive(RngSeed{s.seed}, "eval");
  try {
    const auto report = eval::evaluate(*session.gw, records, tmpl, opts, rng);
    ctx.out << report.to_table();
    if (a.out) detail::write_lines({report.to_json().dump(2)}, *a.out);
  } catch (const eval::EvalAborted& e) {
    ctx.err << "eval aborted: " << e.what() << "\npartial report:\n" << e.partial().to_table();
    return kExitFailure;
  }
  print_traffic(ctx, *session.gw);
  return kExitOk;
}

// loss-check ---------------------------------------------------------------

struct LossCheckArgs {
  std::string fixtures = std::string(JUDGEFORGE_RESOURCE_DIR) + "/fixtures/logprob_pairs.jsonl";
  std::optional<std::string> out;
};

constexpr double kGradTolerance = 1e-6;

int cmd_loss_check(const Context& ctx, const LossCheckArgs& a) {
  const Settings& s = ctx.settings;
  if (ctx.common.dry_run) {
    print_plan(ctx, "loss-check", 0,
               "fixtures=" + a.fixtures + " synthetic_batches=" + std::to_string(s.loss_batches));
    return kExitOk;
  }
  const auto pairs = read_records_strict<loss::PreferencePairLogprobs>(a.fixtures);
  auto& out = ctx.out;
  out << std::setprecision(10);
  out << "alpha=" << s.loss.alpha << " beta=" << s.loss.beta << " eps=" << s.grad_eps << "\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::span<const loss::PreferencePairLogprobs> one(&pairs[i], 1);
    out << "pair " << i << ": margin=" << loss::margin(pairs[i]) << " dpo=" << loss::dpo_loss(one, s.loss.beta)
        << " nll=" << loss::nll_loss(one, s.loss.length_normalized_nll) << " total=" << loss::total_loss(one, s.loss)
        << "\n";
  }
  Json report = Json::object();
  double worst = 0.0;
  if (!pairs.empty()) {
    const auto fixture_report = loss::loss_report(pairs, s.loss, s.grad_eps);
    out << "fixtures: pairs=" << fixture_report.pairs << " dpo=" << fixture_report.dpo
        << " nll=" << fixture_report.nll << " total=" << fixture_report.total
        << " max_grad_rel_error=" << fixture_report.max_grad_rel_error << "\n";
    worst = fixture_report.max_grad_rel_error;
    report["fixtures"] = fixture_report.to_json();
  }
  double synthetic_worst = 0.0;
  for (std::size_t b = 0; b < s.loss_batches; ++b) {
    Rng rng = Rng::derive(RngSeed{s.seed}, "loss_batch:" + std::to_string(b));
    const auto batch = loss::synthetic_batch(rng);
    synthetic_worst = std::max(synthetic_worst, loss::grad_check(batch, s.loss, s.grad_eps));
  }
  out << "synthetic: batches=" << s.loss_batches << " max_grad_rel_error=" << synthetic_worst << "\n";
  worst = std::max(worst, synthetic_worst);
  const bool ok = worst < kGradTolerance && std::isfinite(worst);
  out << "max_grad_rel_error=" << worst << (ok ? " OK" : " FAIL") << " (tolerance " << kGradTolerance << ")\n";
  if (a.out) {
    report["synthetic_batches"] = s.loss_batches;
    report["synthetic_max_grad_rel_error"] = synthetic_worst;
    report["max_grad_rel_error"] = worst;
    report["ok"] = ok;
    detail::write_lines({report.dump(2)}, *a.out);
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"judgeforge: judge-data synthesis, preference sampling and evaluation"};
  app.name("judgeforge");
  app.require_subcommand(1);

  Common common;
  std::optional<Stage> stage;

  RewriteArgs rewrite_args;
  auto* rewrite = app.add_subcommand("rewrite", "Rewrite the base judge template into varied templates");
  add_common(rewrite, common);
  add_gateway_flags(rewrite, common);
  rewrite->add_option("--count", rewrite_args.count, "Templates to generate")->capture_default_str();
  rewrite->add_option("--out", rewrite_args.out, "Output JSONL")->capture_default_str();
  rewrite->add_flag("--include-base", rewrite_args.include_base, "Also write the base template");
  add_opt(rewrite, "--max-attempts", common.flags.rewrite_max_attempts, "Attempts per template");
  add_opt(rewrite, "--temperature", common.flags.temperature, "Rewriter temperature");
  rewrite->callback([&] { stage = Stage::rewrite; });

  JudgeArgs judge_args;
  auto* judge = app.add_subcommand("judge", "Judge QA pairs in both orders and route them");
  add_common(judge, common);
  add_gateway_flags(judge, common);
  judge->add_option("--qa", judge_args.qa, "QA pair JSONL")->required();
  judge->add_option("--out-dir", judge_args.out_dir, "Output directory")->capture_default_str();
  add_opt(judge, "--templates", judge_args.templates, "Template JSONL from `rewrite`");
  add_opt(judge, "--benchmark", judge_args.benchmark, "Benchmark questions to exclude");
  add_opt(judge, "--temperature", common.flags.temperature, "Judge temperature");
  judge->callback([&] { stage = Stage::judge; });

  BuildSftArgs sft_args;
  auto* build_sft = app.add_subcommand("build-sft", "Filter, balance and mix the SFT pool");
  add_common(build_sft, common);
  build_sft->add_option("--pool", sft_args.pool, "sft_pool.jsonl from `judge`")->required();
  build_sft->add_option("--out", sft_args.out, "Output JSONL")->capture_default_str();
  add_opt(build_sft, "--general", sft_args.general, "General chat JSONL");
  add_opt(build_sft, "--benchmark", sft_args.benchmark, "Benchmark questions to exclude");
  add_opt(build_sft, "--ratio", common.flags.ratio, "judge:general ratio, e.g. 4:1, or none");
  build_sft->callback([&] { stage = Stage::build_sft; });

  SampleDpoArgs dpo_args;
  auto* sample_dpo = app.add_subcommand("sample-dpo", "Sample judgments for hard instructions and pair them");
  add_common(sample_dpo, common);
  add_gateway_flags(sample_dpo, common);
  sample_dpo->add_option("--pool", dpo_args.pool, "dpo_pool.jsonl from `judge`")->required();
  sample_dpo->add_option("--out", dpo_args.out, "Output JSONL")->capture_default_str();
  add_opt(sample_dpo, "--report", dpo_args.report, "Yield report path");
  add_opt(sample_dpo, "--k", common.flags.sampler_k, "Samples per instruction");
  add_opt(sample_dpo, "--temperature", common.flags.temperature, "Sampling temperature");
  sample_dpo->add_flag_function(
      "--all-pairs", [&](std::int64_t) { common.flags.sampler_all_pairs = true; },
      "Emit the correct x incorrect cross product");
  sample_dpo->callback([&] { stage = Stage::sample_dpo; });

  TournamentArgs tour_args;
  auto* tour = app.add_subcommand("tournament", "Pick best/worst responses per prompt by knockout");
  add_common(tour, common);
  add_gateway_flags(tour, common);
  tour->add_option("--input", tour_args.input, "Prompt + responses JSONL")->required();
  tour->add_option("--out", tour_args.out, "Policy pair JSONL")->capture_default_str();
  add_opt(tour, "--log", tour_args.log, "Match log JSONL");
  add_opt(tour, "--style", tour_args.style, "Judge prompt style (default: base template)");
  add_opt(tour, "--pairing", common.flags.pairing, "cross | top_only");
  tour->callback([&] { stage = Stage::tournament; });

  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "Score a judge on a pairwise benchmark");
  add_common(ev, common);
  add_gateway_flags(ev, common);
  ev->add_option("--bench", eval_args.bench, "Benchmark JSONL")->required();
  add_opt(ev, "--out", eval_args.out, "Report JSON");
  add_opt(ev, "--style", common.flags.eval_style, "official_english | basic_chinese | instructional_chinese");
  add_opt(ev, "--mode", common.flags.eval_mode, "single_order | both_order_strict");
  ev->add_flag_function(
      "--record-weighted", [&](std::int64_t) { common.flags.eval_record_weighted = true; },
      "Weight the average by records instead of categories");
  ev->callback([&] { stage = Stage::eval; });

  LossCheckArgs loss_args;
  auto* lc = app.add_subcommand("loss-check", "Loss values and gradient check");
  add_common(lc, common);
  lc->add_option("--fixtures", loss_args.fixtures, "Log-prob pair JSONL")->capture_default_str();
  add_opt(lc, "--out", loss_args.out, "Report JSON");
  add_opt(lc, "--batches", common.flags.loss_batches, "Synthetic batches");
  add_opt(lc, "--eps", common.flags.grad_eps, "Finite-difference step");
  add_opt(lc, "--alpha", common.flags.alpha, "NLL weight");
  add_opt(lc, "--beta", common.flags.beta, "DPO temperature");
  lc->callback([&] { stage = Stage::loss_check; });

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known |= sub->get_name() == args.front();
    if (!known) {
      err << "unknown subcommand '" << args.front() << "'\n" << app.help();
      return kExitUsage;
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;  // --help
    err << app.help();
    return kExitUsage;
  }
  if (!stage) {
    err << app.help();
    return kExitUsage;
  }

  try {
    const Json config = common.config_path ? load_config_file(*common.config_path) : Json::object();
    const Settings settings = resolve_settings(config, common.flags, *stage);
    const Context ctx{common, settings, out, err};
    switch (*stage) {
      case Stage::rewrite:
        return cmd_rewrite(ctx, rewrite_args);
      case Stage::judge:
        return cmd_judge(ctx, judge_args);
      case Stage::build_sft:
        return cmd_build_sft(ctx, sft_args);
      case Stage::sample_dpo:
        return cmd_sample_dpo(ctx, dpo_args);
      case Stage::tournament:
        return cmd_tournament(ctx, tour_args);
      case Stage::eval:
        return cmd_eval(ctx, eval_args);
      case Stage::loss_check:
        return cmd_loss_check(ctx, loss_args);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace judgeforge::cli
