#include "judgeforge/cli/config.hpp"

#include <fstream>
#include <sstream>

namespace judgeforge::cli {

namespace {

template <class T>
void take(const Json& cfg, const char* section, const char* key, T& out) {
  auto s = cfg.find(section);
  if (s == cfg.end() || !s->is_object()) return;
  auto k = s->find(key);
  if (k == s->end()) return;
  try {
    out = k->get<T>();
  } catch (const Json::exception&) {
    throw SchemaError(std::string(section) + "." + key, "wrong type in config");
  }
}

template <class T>
void take_flag(const std::optional<T>& flag, T& out) {
  if (flag) out = *flag;
}

std::optional<dataset::Ratio> parse_ratio_setting(const std::string& s) {
  if (s == "none" || s == "off") return std::nullopt;
  return dataset::Ratio::parse(s);
}

tournament::Pairing parse_pairing(const std::string& s) {
  if (s == "cross") return tournament::Pairing::cross;
  if (s == "top_only") return tournament::Pairing::top_only;
  throw std::invalid_argument("unknown pairing '" + s + "' (cross|top_only)");
}

eval::Mode parse_mode_setting(const std::string& s) {
  auto m = eval::parse_mode(s);
  if (!m) throw std::invalid_argument("unknown eval mode '" + s + "'");
  return *m;
}

}  // namespace

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json j = Json::parse(ss.str());
  if (!j.is_object()) throw SchemaError("<config>", "expected a JSON object");
  return j;
}

Settings resolve_settings(const Json& config, const FlagOverrides& flags, Stage stage) {
  Settings s;
  const Json cfg = config.is_object() ? config : Json::object();

  if (auto it = cfg.find("seed"); it != cfg.end()) s.seed = it->get<std::uint64_t>();
  take(cfg, "gateway", "base_url", s.base_url);
  take(cfg, "gateway", "api_key_env", s.api_key_env);
  take(cfg, "gateway", "cache_dir", s.cache_dir);
  take(cfg, "gateway", "max_in_flight", s.max_in_flight);
  take(cfg, "gateway", "requests_per_second", s.requests_per_second);
  take(cfg, "gateway", "timeout_s", s.timeout_s);
  take(cfg, "gateway", "max_attempts", s.max_attempts);
  take(cfg, "gateway", "supports_n", s.supports_n);

  take(cfg, "template_forge", "model", s.rewrite_model);
  take(cfg, "template_forge", "temperature", s.rewrite_temperature);
  take(cfg, "template_forge", "max_attempts", s.rewrite_max_attempts);
  take(cfg, "template_forge", "templates_per_question", s.templates_per_question);
  if (auto it = cfg.find("template_forge"); it != cfg.end()) {
    s.rewrite_tables = forge::RewriteConfig::from_json(*it);
  }

  take(cfg, "judge", "model", s.judge_model);
  take(cfg, "judge", "temperature", s.judge_temperature);
  take(cfg, "judge", "top_p", s.judge_top_p);
  take(cfg, "judge", "max_tokens", s.max_tokens);

  std::string ratio_text;
  take(cfg, "dataset", "ratio", ratio_text);
  if (!ratio_text.empty()) s.ratio = parse_ratio_setting(ratio_text);

  take(cfg, "dpo_sampler", "model", s.sampler_model);
  take(cfg, "dpo_sampler", "k", s.sampler_k);
  take(cfg, "dpo_sampler", "temperature", s.sampler_temperature);
  take(cfg, "dpo_sampler", "all_pairs", s.sampler_all_pairs);
  take(cfg, "dpo_sampler", "max_pairs_per_instruction", s.sampler_max_pairs);

  take(cfg, "loss", "alpha", s.loss.alpha);
  take(cfg, "loss", "beta", s.loss.beta);
  take(cfg, "loss", "length_normalized_nll", s.loss.length_normalized_nll);
  take(cfg, "loss", "batches", s.loss_batches);
  take(cfg, "loss", "eps", s.grad_eps);

  take(cfg, "tournament", "model", s.tournament_model);
  std::string pairing_text;
  take(cfg, "tournament", "pairing", pairing_text);
  if (!pairing_text.empty()) s.pairing = parse_pairing(pairing_text);

  take(cfg, "eval", "model", s.eval_model);
  std::string mode_text;
  take(cfg, "eval", "mode", mode_text);
  if (!mode_text.empty()) s.eval_mode = parse_mode_setting(mode_text);
  take(cfg, "eval", "style", s.eval_style);
  take(cfg, "eval", "record_weighted", s.eval_record_weighted);

  // Flags last.
  take_flag(flags.seed, s.seed);
  take_flag(flags.base_url, s.base_url);
  take_flag(flags.cache_dir, s.cache_dir);
  take_flag(flags.max_in_flight, s.max_in_flight);
  if (flags.ratio) s.ratio = parse_ratio_setting(*flags.ratio);
  take_flag(flags.sampler_k, s.sampler_k);
  take_flag(flags.sampler_all_pairs, s.sampler_all_pairs);
  take_flag(flags.alpha, s.loss.alpha);
  take_flag(flags.beta, s.loss.beta);
  take_flag(flags.loss_batches, s.loss_batches);
  take_flag(flags.grad_eps, s.grad_eps);
  if (flags.pairing) s.pairing = parse_pairing(*flags.pairing);
  if (flags.eval_mode) s.eval_mode = parse_mode_setting(*flags.eval_mode);
  take_flag(flags.eval_style, s.eval_style);
  take_flag(flags.eval_record_weighted, s.eval_record_weighted);
  take_flag(flags.rewrite_max_attempts, s.rewrite_max_attempts);

  auto stage_model = [&]() -> std::string* {
    switch (stage) {
      case Stage::rewrite:
        return &s.rewrite_model;
      case Stage::judge:
      case Stage::build_sft:
        return &s.judge_model;
      case Stage::sample_dpo:
        return &s.sampler_model;
      case Stage::tournament:
        return &s.tournament_model;
      case Stage::eval:
        return &s.eval_model;
      case Stage::loss_check:
        return nullptr;
    }
    return nullptr;
  };
  auto stage_temperature = [&]() -> double* {
    switch (stage) {
      case Stage::rewrite:
        return &s.rewrite_temperature;
      case Stage::judge:
        return &s.judge_temperature;
      case Stage::sample_dpo:
        return &s.sampler_temperature;
      default:
        return nullptr;
    }
  };
  if (flags.model) {
    if (auto* m = stage_model()) *m = *flags.model;
  }
  if (flags.temperature) {
    auto* t = stage_temperature();
    if (!t) throw std::invalid_argument("--temperature does not apply to this command");
    *t = *flags.temperature;
  }
  s.loss.validate();
  if (s.max_in_flight < 1) throw std::invalid_argument("gateway.max_in_flight must be >= 1");
  if (s.sampler_k < 1) throw std::invalid_argument("dpo_sampler.k must be >= 1");
  return s;
}

}  // namespace judgeforge::cli
