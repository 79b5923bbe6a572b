#include <gtest/gtest.h>

#include <sstream>

#include "judgeforge/cli/cli.hpp"
#include "judgeforge/cli/config.hpp"
#include "support.hpp"

using namespace judgeforge;
using namespace judgeforge::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kRes = JUDGEFORGE_RESOURCE_DIR;

std::size_t count_lines(const fs::path& p) {
  std::size_t n = 0;
  std::istringstream in(testsupport::slurp(p));
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

}  // namespace

TEST(Cli, LossCheckPasses) {
  const auto r = invoke({"loss-check", "--seed", "7", "--batches", "20"});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("0.6931471806"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({"bogus"}).code, kExitUsage);
  EXPECT_NE(invoke({"bogus"}).err.find("unknown subcommand"), std::string::npos);
  EXPECT_EQ(invoke({"loss-check", "--no-such-flag"}).code, kExitUsage);
  EXPECT_EQ(invoke({"judge"}).code, kExitUsage);  // --qa is required
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({"judge", "--qa", "/nonexistent/qa.jsonl"}).code, kExitFailure);
}

TEST(Cli, DryRunMakesNoRequestsAndWritesNothing) {
  testsupport::TempDir dir;
  // Unroutable endpoint and no mock: any request would fail or hang.
  const auto r = invoke({"judge", "--dry-run", "--qa", kRes + "/fixtures/qa_pairs.jsonl", "--out-dir",
                      (dir / "judged").string(), "--base-url", "http://127.0.0.1:9"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("planned_requests=16"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir / "judged"));

  const auto lc = invoke({"rewrite", "--dry-run", "--count", "5", "--out", (dir / "t.jsonl").string(), "--base-url",
                       "http://127.0.0.1:9"});
  EXPECT_EQ(lc.code, kExitOk);
  EXPECT_NE(lc.out.find("planned_requests=5"), std::string::npos) << lc.out;
  EXPECT_FALSE(fs::exists(dir / "t.jsonl"));
}

TEST(Cli, Precedence) {
  const Json config = Json::parse(R"({
    "seed": 5,
    "gateway": {"base_url": "http://config", "max_in_flight": 8},
    "judge": {"model": "judge-from-config", "temperature": 0.3},
    "dpo_sampler": {"k": 8, "temperature": 1.1},
    "loss": {"alpha": 0.5},
    "dataset": {"ratio": "3:1"}
  })");
  const Settings none = resolve_settings(Json::object(), {}, Stage::judge);
  EXPECT_EQ(none.seed, 0u);
  EXPECT_EQ(none.max_in_flight, 4u);
  EXPECT_EQ(none.loss.alpha, 0.2);
  EXPECT_EQ(none.loss.beta, 0.1);
  EXPECT_EQ(none.sampler_k, 6);
  EXPECT_EQ(none.sampler_temperature, 0.9);
  EXPECT_EQ(none.judge_temperature, 0.0);
  EXPECT_EQ(none.ratio, (dataset::Ratio{4, 1}));

  const Settings cfg = resolve_settings(config, {}, Stage::judge);
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.base_url, "http://config");
  EXPECT_EQ(cfg.max_in_flight, 8u);
  EXPECT_EQ(cfg.judge_model, "judge-from-config");
  EXPECT_EQ(cfg.judge_temperature, 0.3);
  EXPECT_EQ(cfg.sampler_k, 8);
  EXPECT_EQ(cfg.loss.alpha, 0.5);
  EXPECT_EQ(cfg.loss.beta, 0.1);
  EXPECT_EQ(cfg.ratio, (dataset::Ratio{3, 1}));

  FlagOverrides f;
  f.seed = 9;
  f.base_url = "http://flag";
  f.model = "judge-from-flag";
  f.temperature = 0.6;
  f.alpha = 0.1;
  f.ratio = "none";
  const Settings flag = resolve_settings(config, f, Stage::judge);
  EXPECT_EQ(flag.seed, 9u);
  EXPECT_EQ(flag.base_url, "http://flag");
  EXPECT_EQ(flag.max_in_flight, 8u);
  EXPECT_EQ(flag.judge_model, "judge-from-flag");
  EXPECT_EQ(flag.judge_temperature, 0.6);
  EXPECT_EQ(flag.sampler_temperature, 1.1);  // other stage untouched
  EXPECT_EQ(flag.loss.alpha, 0.1);
  EXPECT_FALSE(flag.ratio.has_value());

  const Settings sampler = resolve_settings(config, f, Stage::sample_dpo);
  EXPECT_EQ(sampler.sampler_model, "judge-from-flag");
  EXPECT_EQ(sampler.sampler_temperature, 0.6);
  EXPECT_EQ(sampler.judge_temperature, 0.3);

  FlagOverrides bad;
  bad.temperature = 0.5;
  EXPECT_THROW(resolve_settings(config, bad, Stage::loss_check), std::invalid_argument);
  FlagOverrides bad_beta;
  bad_beta.beta = 0.0;
  EXPECT_THROW(resolve_settings(config, bad_beta, Stage::loss_check), std::invalid_argument);
}

TEST(Cli, ConfigFileOnCommandLine) {
  testsupport::TempDir dir;
  testsupport::spit(dir / "c.json", R"({"loss": {"alpha": 0.0, "beta": 0.1}})");
  const auto r = invoke({"loss-check", "--config", (dir / "c.json").string(), "--batches", "5"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("alpha=0"), std::string::npos) << r.out;
  testsupport::spit(dir / "broken.json", "{not json");
  EXPECT_EQ(invoke({"loss-check", "--config", (dir / "broken.json").string()}).code, kExitFailure);
}

TEST(Cli, EndToEndWithMock) {
  testsupport::TempDir dir;
  // q5 gets a position-biased judge (lands in the DPO pool); everything else
  // is judged correctly. Sampler requests get a fixed mixed batch.
  const Json script = {
      {"supports_n", true},
      {"rules",
       Json::array({
           {{"when", {{"model", "sft-stage-model"}}},
            {"respond", Json::array({{{"texts", {"r [[A]]", "r [[B]]", "r [[A]]", "r [[B]]", "r [[A]]", "r [[A]]"}}}})}},
           {{"when", {{"contains", "number 5"}}}, {"respond", Json::array({{{"text", "Biased. [[A]]"}}})}},
       })},
      {"default", {{"prefer", "GOOD"}, {"over", "BAD"}}}};
  testsupport::spit(dir / "mock.json", script.dump());
  const std::string mock = (dir / "mock.json").string();
  const std::string judged = (dir / "judged").string();

  auto j = invoke({"judge", "--qa", kRes + "/fixtures/qa_pairs.jsonl", "--out-dir", judged, "--mock", mock});
  ASSERT_EQ(j.code, kExitOk) << j.err;
  EXPECT_EQ(count_lines(dir / "judged" / "sft_pool.jsonl"), 7u);
  EXPECT_EQ(count_lines(dir / "judged" / "dpo_pool.jsonl"), 1u);
  EXPECT_EQ(count_lines(dir / "judged" / "discards.jsonl"), 0u);
  EXPECT_TRUE(fs::exists(dir / "judged" / "summary.txt"));
  const std::string first_sft = testsupport::slurp(dir / "judged" / "sft_pool.jsonl");

  // rerun: byte-identical outputs
  j = invoke({"judge", "--qa", kRes + "/fixtures/qa_pairs.jsonl", "--out-dir", judged, "--mock", mock});
  ASSERT_EQ(j.code, kExitOk);
  EXPECT_EQ(testsupport::slurp(dir / "judged" / "sft_pool.jsonl"), first_sft);

  const auto b = invoke({"build-sft", "--pool", judged + "/sft_pool.jsonl", "--out", (dir / "sft.jsonl").string()});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_NE(b.err.find("mixing disabled"), std::string::npos);
  const auto sft = read_records_strict<SftRecord>(dir / "sft.jsonl");
  // 7 routed to SFT: 4 with the chosen answer longer, 3 with it shorter
  EXPECT_EQ(sft.size(), 6u);
  EXPECT_TRUE(fs::exists(dir / "sft.jsonl.summary.txt"));

  const auto d = invoke({"sample-dpo", "--pool", judged + "/dpo_pool.jsonl", "--out", (dir / "dpo.jsonl").string(),
                      "--mock", mock});
  ASSERT_EQ(d.code, kExitOk) << d.err;
  const auto pairs = read_records_strict<DpoRecord>(dir / "dpo.jsonl");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].chosen.verdict, Verdict::A);
  EXPECT_EQ(pairs[0].rejected.verdict, Verdict::B);
  EXPECT_TRUE(fs::exists(dir / "dpo.jsonl.yield.txt"));

  const auto dry = invoke({"sample-dpo", "--dry-run", "--pool", judged + "/dpo_pool.jsonl", "--mock", mock});
  EXPECT_EQ(dry.code, kExitOk);
  EXPECT_NE(dry.out.find("planned_requests=1"), std::string::npos) << dry.out;
}

TEST(Cli, TournamentAndEvalCommands) {
  testsupport::TempDir dir;
  std::vector<tournament::TournamentPrompt> prompts(1);
  prompts[0].id = "p0";
  prompts[0].prompt = "Write something";
  for (int i = 0; i < 16; ++i) prompts[0].responses.push_back("response " + std::to_string(i) + (i == 3 ? " GOOD" : "") +
                                                              (i == 9 ? " BAD" : ""));
  write_records(prompts, dir / "t.jsonl");
  // GOOD beats everything, BAD loses to everything, others: coin flips.
  const Json script = {{"rules", Json::array()}, {"default", {{"prefer", "GOOD"}, {"over", "BAD"}}}};
  testsupport::spit(dir / "mock.json", script.dump());
  const auto t = invoke({"tournament", "--input", (dir / "t.jsonl").string(), "--out", (dir / "pp.jsonl").string(),
                      "--mock", (dir / "mock.json").string(), "--pairing", "top_only"});
  EXPECT_EQ(t.code, kExitOk) << t.err;
  EXPECT_TRUE(fs::exists(dir / "pp.jsonl.matches.jsonl"));

  std::vector<BenchRecord> bench;
  for (int i = 0; i < 10; ++i) {
    bench.push_back({"b" + std::to_string(i), i < 5 ? "chat" : "safety", "q" + std::to_string(i), "GOOD " + std::to_string(i),
                     "BAD " + std::to_string(i)});
  }
  write_records(bench, dir / "bench.jsonl");
  const auto e = invoke({"eval", "--bench", (dir / "bench.jsonl").string(), "--mock", (dir / "mock.json").string(),
                      "--mode", "both_order_strict", "--out", (dir / "report.json").string()});
  EXPECT_EQ(e.code, kExitOk) << e.err;
  EXPECT_NE(e.out.find("1.0000"), std::string::npos) << e.out;
  const Json report = Json::parse(testsupport::slurp(dir / "report.json"));
  EXPECT_EQ(report["average"], 1.0);
  EXPECT_NE(invoke({"eval", "--bench", (dir / "bench.jsonl").string(), "--mode", "sideways"}).code, kExitOk);
}
