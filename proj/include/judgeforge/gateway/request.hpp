#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "judgeforge/core/records.hpp"

namespace judgeforge::gateway {

enum class Role { system, user, assistant };

struct Message {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct CompletionRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  double top_p = 1.0;
  int n = 1;
  int max_tokens = 2048;
  bool want_logprobs = false;
  // Forwarded to providers that accept it; also separates otherwise
  // identical sampling requests in the cache.
  std::optional<std::uint64_t> seed;

  // Throws std::invalid_argument on a broken invariant.
  void validate() const;

  friend bool operator==(const CompletionRequest&, const CompletionRequest&) = default;
};

CompletionRequest single_user_request(const GenParams& params, std::string prompt);

struct Completion {
  std::vector<std::string> texts;
  std::optional<std::vector<std::vector<double>>> per_token_logprobs;
  Json provider_meta;

  friend bool operator==(const Completion&, const Completion&) = default;
};

struct CacheKey {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

std::string_view to_string(Role r);

// Sorted keys, shortest round-trip float text, -0 folded into 0.
std::string canonical_serialization(const CompletionRequest& request);

// SHA-256 over canonical_serialization.
CacheKey cache_key(const CompletionRequest& request);

Json encode_request(const CompletionRequest& request);
Json encode_completion(const Completion& c);
Completion decode_completion(const Json& j);

}  // namespace judgeforge::gateway
