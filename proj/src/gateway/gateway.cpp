#include "judgeforge/gateway/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace judgeforge::gateway {

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
  const double ms = static_cast<double>(base_delay.count()) * std::pow(factor, attempt - 1);
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

bool is_retryable_status(int status) {
  return status == 0 || status == 408 || status == 429 || (status >= 500 && status <= 599);
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayConfig config)
    : provider_(std::move(provider)),
      config_(std::move(config)),
      cache_(config_.cache_enabled ? config_.cache_dir : std::nullopt) {
  if (!provider_) throw std::invalid_argument("Gateway: provider is null");
  if (config_.retry.max_attempts < 1) throw std::invalid_argument("Gateway: max_attempts < 1");
  if (!config_.sleeper) {
    config_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

void Gateway::pace() {
  if (config_.requests_per_second <= 0.0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / config_.requests_per_second));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(pace_mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  const auto wait = slot - std::chrono::steady_clock::now();
  if (wait > std::chrono::steady_clock::duration::zero()) {
    config_.sleeper(std::chrono::duration_cast<std::chrono::milliseconds>(wait));
  }
}

Completion Gateway::complete(const CompletionRequest& request) {
  return complete_traced(request).completion;
}

TracedCompletion Gateway::complete_traced(const CompletionRequest& request) {
  try {
    request.validate();
  } catch (const std::invalid_argument& e) {
    throw RequestError(e.what(), 0);
  }
  const CacheKey key = cache_key(request);
  if (config_.cache_enabled) {
    if (auto hit = cache_.get(key)) {
      ++cache_hits_;
      return {std::move(*hit), 0, true};
    }
  }

  std::vector<AttemptRecord> log;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    pace();
    ++provider_calls_;
    ProviderReply reply = provider_->send(request);
    if (reply.status == 200 && !reply.timed_out) {
      if (static_cast<int>(reply.texts.size()) != request.n) {
        throw RequestError("provider returned " + std::to_string(reply.texts.size()) +
                               " choices, expected " + std::to_string(request.n),
                           200);
      }
      Completion c;
      c.texts = std::move(reply.texts);
      if (request.want_logprobs && provider_->supports_logprobs()) {
        c.per_token_logprobs = std::move(reply.logprobs);
      }
      c.provider_meta = std::move(reply.meta);
      if (config_.cache_enabled) cache_.put(key, c);
      return {std::move(c), attempt, false};
    }
    const int status = reply.timed_out ? 0 : reply.status;
    if (!is_retryable_status(status)) {
      throw RequestError("request rejected with HTTP " + std::to_string(status) + ": " +
                             reply.error_message,
                         status);
    }
    AttemptRecord rec{attempt, status, reply.error_message, std::chrono::milliseconds{0}};
    if (attempt < config_.retry.max_attempts) {
      rec.backoff = config_.retry.delay_after(attempt);
      log.push_back(rec);
      config_.sleeper(rec.backoff);
    } else {
      log.push_back(rec);
    }
  }
  throw TransportError("retries exhausted after " + std::to_string(log.size()) + " attempts",
                       std::move(log));
}

std::vector<BatchSlot> Gateway::complete_batch(std::span<const CompletionRequest> requests,
                                               std::size_t max_in_flight) {
  if (max_in_flight < 1) throw std::invalid_argument("complete_batch: max_in_flight must be >= 1");
  std::vector<BatchSlot> slots(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      try {
        slots[i].completion = complete(requests[i]);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  const std::size_t workers = std::min(max_in_flight, requests.size());
  if (workers <= 1) {
    worker();
    return slots;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();  // joins
  return slots;
}

}  // namespace judgeforge::gateway
