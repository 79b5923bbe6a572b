#pragma once

#include <optional>
#include <string>
#include <vector>

#include "judgeforge/gateway/request.hpp"

namespace judgeforge::gateway {

// What a provider hands back for one attempt. status 200 carries texts;
// anything else is a failure the gateway classifies. status 0 with
// timed_out models a transport timeout.
struct ProviderReply {
  int status = 200;
  bool timed_out = false;
  std::vector<std::string> texts;
  std::optional<std::vector<std::vector<double>>> logprobs;
  Json meta;
  std::string error_message;

  static ProviderReply success(std::vector<std::string> texts) {
    ProviderReply r;
    r.texts = std::move(texts);
    return r;
  }
  static ProviderReply failure(int status, std::string message) {
    ProviderReply r;
    r.status = status;
    r.error_message = std::move(message);
    return r;
  }
  static ProviderReply timeout() {
    ProviderReply r;
    r.status = 0;
    r.timed_out = true;
    r.error_message = "timeout";
    return r;
  }
};

class Provider {
 public:
  virtual ~Provider() = default;
  // Must be safe to call from several threads at once.
  virtual ProviderReply send(const CompletionRequest& request) = 0;
  // Whether a single request with n > 1 returns n choices.
  virtual bool supports_n() const { return true; }
  virtual bool supports_logprobs() const { return false; }
  virtual std::string name() const = 0;
};

}  // namespace judgeforge::gateway
