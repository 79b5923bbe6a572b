#pragma once

#include <chrono>
#include <string>

#include "judgeforge/gateway/provider.hpp"

namespace judgeforge::gateway {

struct HttpProviderConfig {
  // e.g. "https://api.openai.com/v1" or "http://127.0.0.1:8000/v1"
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{120};
  bool supports_n = true;
  bool supports_logprobs = true;
};

// OpenAI-compatible chat-completions client (POST {base_url}/chat/completions).
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  ProviderReply send(const CompletionRequest& request) override;
  bool supports_n() const override { return config_.supports_n; }
  bool supports_logprobs() const override { return config_.supports_logprobs; }
  std::string name() const override { return "http:" + config_.base_url; }

 private:
  HttpProviderConfig config_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. /v1
};

// Parses a chat-completions response body into a reply (choices ordered by
// "index"). Exposed for tests.
ProviderReply parse_chat_completion(const Json& body);

}  // namespace judgeforge::gateway
