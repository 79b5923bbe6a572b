#pragma once

#include <optional>
#include <string>
#include <vector>

#include "judgeforge/core/records.hpp"
#include "judgeforge/core/rng.hpp"
#include "judgeforge/gateway/gateway.hpp"
#include "judgeforge/template_forge/template.hpp"

namespace judgeforge::forge {

struct WeightedOption {
  std::string text;
  double probability = 0.0;

  friend bool operator==(const WeightedOption&, const WeightedOption&) = default;
};

using OptionTable = std::vector<WeightedOption>;

// Probability tables driving the template rewriter; listed order defines the
// cumulative intervals.
struct RewriteConfig {
  OptionTable constraints;
  OptionTable principle_formats;
  OptionTable output_formats;
  OptionTable langs;
  std::string base_template;

  static RewriteConfig defaults();
  // Loads {"constraints": [{"text","p"}...], ..., "base_template": "..."};
  // missing keys keep their defaults.
  static RewriteConfig from_json(const Json& j);
  Json to_json() const;

  // Throws std::invalid_argument naming the offending table.
  void validate() const;
};

struct RewriteOptions {
  std::string constraint;
  std::string principle_format;
  std::string output_format;
  std::string lang;

  friend bool operator==(const RewriteOptions&, const RewriteOptions&) = default;
};

// Maps u in [0,1) onto the half-open cumulative interval of the table.
const WeightedOption& pick_option(const OptionTable& table, double u);

// Deterministic form used by sample_rewrite_options: draws in field order
// constraint, principle_format, output_format, lang.
RewriteOptions options_from_draws(const RewriteConfig& config, double u_constraint,
                                  double u_principle, double u_output, double u_lang);

RewriteOptions sample_rewrite_options(const RewriteConfig& config, Rng& rng);

std::string build_rewrite_instruction(const RewriteConfig& config, const RewriteOptions& options);

Lang lang_of(const RewriteOptions& options);
// json option -> json; "same as original" -> bracket_verdict; anything else
// -> other (resolved from the rewritten text).
OutputFormatClass expected_format_class(const RewriteOptions& options);

class RewriteFailure : public std::runtime_error {
 public:
  RewriteFailure(const std::string& what, int attempts, std::vector<Violation> last)
      : std::runtime_error(what), attempts_(attempts), last_(std::move(last)) {}
  int attempts() const { return attempts_; }
  const std::vector<Violation>& last_violations() const { return last_; }

 private:
  int attempts_;
  std::vector<Violation> last_;
};

struct RewriteResult {
  JudgeTemplate judge_template;
  RewriteOptions options;
  int attempts = 0;
};

// Checks a rewriter reply: template validity plus a parseable verdict
// convention consistent with the requested output format.
std::vector<Violation> validate_rewrite(std::string_view text, const RewriteOptions& options);

// Sends the rewrite prompt, validating each reply. Every attempt carries the
// same prompt; attempt i uses seed base_seed + i so a retry is not answered
// from the cache.
RewriteResult rewrite_template(gateway::Gateway& gw, const RewriteConfig& config,
                               const RewriteOptions& options, int max_attempts,
                               const GenParams& params);

// A template as stored on disk by the rewrite stage.
struct TemplateRecord {
  std::string id;
  JudgeTemplate judge_template;
  std::optional<RewriteOptions> options;  // absent for the base template
  int attempts = 0;

  friend bool operator==(const TemplateRecord&, const TemplateRecord&) = default;
};

}  // namespace judgeforge::forge

namespace judgeforge {
// {"id","text","lang","output_format_class","provenance","options"?,"attempts"}
template <>
struct RecordSchema<forge::TemplateRecord> {
  static constexpr const char* name = "judge_template";
  static Json encode(const forge::TemplateRecord& r);
  static forge::TemplateRecord decode(const Json& j);
  static const std::string& key(const forge::TemplateRecord& r) { return r.id; }
};
}  // namespace judgeforge
