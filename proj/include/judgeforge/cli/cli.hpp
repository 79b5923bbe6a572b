#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "judgeforge/cli/config.hpp"
#include "judgeforge/dpo/dpo_sampler.hpp"
#include "judgeforge/gateway/gateway.hpp"
#include "judgeforge/judgment/judgment.hpp"

namespace judgeforge::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Provider selection: the mock script when given, otherwise the HTTP
// endpoint from settings (API key read from settings.api_key_env).
std::shared_ptr<gateway::Provider> make_provider(const Settings& settings,
                                                 const std::optional<std::filesystem::path>& mock_script);
gateway::GatewayConfig gateway_config(const Settings& settings);

// Benchmark questions for the overlap filter: JSONL objects with a
// "question" (or "prompt") field.
std::vector<std::string> read_benchmark_questions(const std::filesystem::path& path);

// The judge stage: overlap filter, template assignment, swap protocol and
// routing, usable without the command line.
struct JudgeStageOutput {
  std::vector<judgment::RoutedItem> routed;  // input order
  std::vector<QAPair> overlap_removed;

  std::vector<judgment::RoutedItem> with_route(judgment::Route r) const;
  std::string summary() const;
};

// Template index per pair; derived from the pair id so it does not depend on
// file order.
std::vector<std::size_t> assign_templates(std::span<const QAPair> pairs, std::size_t template_count,
                                          RngSeed seed);

JudgeStageOutput run_judge_stage(gateway::Gateway& gw, std::span<const forge::JudgeTemplate> templates,
                                 std::span<const QAPair> pairs, const GenParams& params,
                                 std::size_t max_in_flight, RngSeed seed,
                                 std::span<const std::string> benchmark_questions = {});

// Writes sft_pool.jsonl, dpo_pool.jsonl, discards.jsonl and summary.txt.
void write_judge_outputs(const JudgeStageOutput& output, const std::filesystem::path& dir);

}  // namespace judgeforge::cli
