#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "judgeforge/core/records.hpp"
#include "judgeforge/dataset/dataset_builder.hpp"
#include "judgeforge/eval/eval_bench.hpp"
#include "judgeforge/loss/loss_lab.hpp"
#include "judgeforge/template_forge/rewrite.hpp"
#include "judgeforge/tournament/tournament.hpp"

namespace judgeforge::cli {

// Every tunable of the pipeline. alpha 0.2, beta 0.1, k 6, sampling
// temperature 0.9, greedy evaluation, 4:1 judge/general mix.
struct Settings {
  std::uint64_t seed = 0;

  // gateway
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string cache_dir;  // empty: in-memory cache only
  std::size_t max_in_flight = 4;
  double requests_per_second = 0.0;
  int timeout_s = 120;
  int max_attempts = 5;
  bool supports_n = true;

  // template_forge
  std::string rewrite_model = "gpt-4o";
  double rewrite_temperature = 0.7;
  int rewrite_max_attempts = 3;
  int templates_per_question = 1;
  forge::RewriteConfig rewrite_tables = forge::RewriteConfig::defaults();

  // judgment (synthesis-time judging)
  std::string judge_model = "gpt-4o";
  double judge_temperature = 0.0;
  double judge_top_p = 1.0;
  int max_tokens = 2048;

  // dataset
  std::optional<dataset::Ratio> ratio = dataset::Ratio{};

  // dpo_sampler
  std::string sampler_model = "sft-stage-model";
  int sampler_k = 6;
  double sampler_temperature = 0.9;
  bool sampler_all_pairs = false;
  std::size_t sampler_max_pairs = 4;

  // loss
  loss::LossConfig loss;
  std::size_t loss_batches = 100;
  double grad_eps = 1e-5;

  // tournament
  std::string tournament_model = "judge-model";
  tournament::Pairing pairing = tournament::Pairing::cross;

  // eval
  std::string eval_model = "judge-model";
  eval::Mode eval_mode = eval::Mode::single_order;
  std::string eval_style = "official_english";
  bool eval_record_weighted = false;
};

// Command-line values; set fields win over the config file.
struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> base_url;
  std::optional<std::string> cache_dir;
  std::optional<std::size_t> max_in_flight;
  std::optional<std::string> model;  // applies to the active stage's model
  std::optional<std::string> ratio;  // "4:1" or "none"
  std::optional<int> sampler_k;
  std::optional<double> temperature;  // applies to the active stage
  std::optional<bool> sampler_all_pairs;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::size_t> loss_batches;
  std::optional<double> grad_eps;
  std::optional<std::string> pairing;
  std::optional<std::string> eval_mode;
  std::optional<std::string> eval_style;
  std::optional<bool> eval_record_weighted;
  std::optional<int> rewrite_max_attempts;
};

enum class Stage { rewrite, judge, build_sft, sample_dpo, tournament, eval, loss_check };

// Config file keys by module: gateway, template_forge, judge, dataset,
// dpo_sampler, loss, tournament, eval (plus top-level "seed").
Settings resolve_settings(const Json& config, const FlagOverrides& flags, Stage stage);

Json load_config_file(const std::filesystem::path& path);

}  // namespace judgeforge::cli
