#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "judgeforge/gateway/cache.hpp"
#include "judgeforge/gateway/provider.hpp"

namespace judgeforge::gateway {

struct AttemptRecord {
  int attempt = 0;  // 1-based
  int status = 0;   // 0 = timeout / transport failure
  std::string message;
  std::chrono::milliseconds backoff{0};  // sleep before the next attempt
};

class GatewayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Retryable failures persisted through every attempt.
class TransportError : public GatewayError {
 public:
  TransportError(const std::string& what, std::vector<AttemptRecord> attempts)
      : GatewayError(what), attempts_(std::move(attempts)) {}
  const std::vector<AttemptRecord>& attempts() const { return attempts_; }

 private:
  std::vector<AttemptRecord> attempts_;
};

// Non-retryable 4xx, or a malformed request.
class RequestError : public GatewayError {
 public:
  RequestError(const std::string& what, int status) : GatewayError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;

  // Delay slept after failed attempt `attempt` (1-based).
  std::chrono::milliseconds delay_after(int attempt) const;
};

bool is_retryable_status(int status);

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct GatewayConfig {
  RetryPolicy retry;
  bool cache_enabled = true;
  std::optional<std::filesystem::path> cache_dir;
  // Minimum spacing between provider calls; 0 disables.
  double requests_per_second = 0.0;
  // Defaults to std::this_thread::sleep_for; tests inject a recorder.
  Sleeper sleeper;
};

struct TracedCompletion {
  Completion completion;
  int attempts = 0;  // 0 when served from cache
  bool from_cache = false;
};

// One slot of a batch: either a completion or an error message.
struct BatchSlot {
  std::optional<Completion> completion;
  std::string error;

  bool ok() const { return completion.has_value(); }
};

class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayConfig config = {});

  Completion complete(const CompletionRequest& request);
  TracedCompletion complete_traced(const CompletionRequest& request);

  // Results are index-aligned with requests; at most max_in_flight are
  // outstanding at any instant.
  std::vector<BatchSlot> complete_batch(std::span<const CompletionRequest> requests,
                                        std::size_t max_in_flight);

  const Provider& provider() const { return *provider_; }
  std::size_t provider_calls() const { return provider_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  void pace();

  std::shared_ptr<Provider> provider_;
  GatewayConfig config_;
  ResponseCache cache_;
  std::atomic<std::size_t> provider_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::mutex pace_mu_;
  std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace judgeforge::gateway
