#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>

#include "judgeforge/gateway/provider.hpp"

namespace judgeforge::gateway {

// Text of the last user message, or "" when there is none.
std::string last_user_message(const CompletionRequest& request);

// Programmable in-process provider. Counts calls and tracks the peak number
// of concurrent send() calls.
class MockProvider : public Provider {
 public:
  using Handler = std::function<ProviderReply(const CompletionRequest&)>;

  struct Options {
    bool supports_n = true;
    bool supports_logprobs = false;
    // Simulated latency per call, useful for concurrency tests.
    std::chrono::milliseconds latency{0};
  };

  explicit MockProvider(Handler handler);
  MockProvider(Handler handler, Options options);

  // Replies with the last user message, repeated n times.
  static std::shared_ptr<MockProvider> echo();

  // Script format (JSON):
  //   {"supports_n": true, "supports_logprobs": false,
  //    "rules": [{"when": {"contains": "...", "model": "..."},
  //               "respond": [<action>, ...], "cycle": false}],
  //    "default": <action>}
  // Actions are consumed in order per rule; the last one repeats unless
  // "cycle" is set. An action is one of
  //   {"text": "..."}                {"texts": ["...", ...]}
  //   {"echo": true}                 {"error": 429, "message": "..."}
  //   {"timeout": true}
  //   {"prefer": "X", "over": "Y", "reasoning": "..."}
  // "prefer" answers "[[A]]" when X occurs before Y in the prompt (so the
  // answer containing X sits in slot A), "[[B]]" otherwise, and a verdict-free
  // reply when either marker is absent. Any action may add "logprobs".
  static std::shared_ptr<MockProvider> from_script(const Json& script);
  static std::shared_ptr<MockProvider> from_script_file(const std::filesystem::path& path);

  ProviderReply send(const CompletionRequest& request) override;
  bool supports_n() const override { return options_.supports_n; }
  bool supports_logprobs() const override { return options_.supports_logprobs; }
  std::string name() const override { return "mock"; }

  std::size_t call_count() const { return calls_.load(); }
  std::size_t peak_in_flight() const { return peak_.load(); }

 private:
  Handler handler_;
  Options options_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_{0};
};

// Judge replies used by mocks: a short reasoning paragraph plus the marker.
std::string mock_judgment_text(char position, std::string_view reasoning = {});

}  // namespace judgeforge::gateway
