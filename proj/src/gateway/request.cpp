#include "judgeforge/gateway/request.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "judgeforge/core/text.hpp"

namespace judgeforge::gateway {

namespace {

std::string canonical_double(double v) {
  if (v == 0.0) v = 0.0;  // folds -0
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite float in request");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "user";
}

void CompletionRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("CompletionRequest: messages must be nonempty");
  if (n < 1) throw std::invalid_argument("CompletionRequest: n must be >= 1");
  if (max_tokens < 1) throw std::invalid_argument("CompletionRequest: max_tokens must be >= 1");
  if (!(temperature >= 0.0)) throw std::invalid_argument("CompletionRequest: temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("CompletionRequest: top_p must be in (0,1]");
}

CompletionRequest single_user_request(const GenParams& params, std::string prompt) {
  CompletionRequest r;
  r.model = params.model;
  r.messages.push_back({Role::user, std::move(prompt)});
  r.temperature = params.temperature;
  r.top_p = params.top_p;
  r.max_tokens = params.max_tokens;
  r.seed = params.seed;
  return r;
}

std::string CacheKey::hex() const { return text::hex_encode(bytes.data(), bytes.size()); }

std::string canonical_serialization(const CompletionRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back(Json{{"content", m.content}, {"role", to_string(m.role)}});
  }
  Json j{{"max_tokens", request.max_tokens},
         {"messages", std::move(messages)},
         {"model", request.model},
         {"n", request.n},
         {"seed", request.seed ? Json(*request.seed) : Json(nullptr)},
         {"temperature", canonical_double(request.temperature)},
         {"top_p", canonical_double(request.top_p)},
         {"want_logprobs", request.want_logprobs}};
  // nlohmann::json objects are key-sorted.
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

CacheKey cache_key(const CompletionRequest& request) {
  const std::string canon = canonical_serialization(request);
  CacheKey key;
  unsigned int len = 0;
  if (EVP_Digest(canon.data(), canon.size(), key.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != key.bytes.size()) {
    throw std::runtime_error("sha256 digest failed");
  }
  return key;
}

Json encode_request(const CompletionRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back(Json{{"role", to_string(m.role)}, {"content", m.content}});
  }
  Json body{{"model", request.model},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"top_p", request.top_p},
            {"n", request.n},
            {"max_tokens", request.max_tokens}};
  if (request.want_logprobs) body["logprobs"] = true;
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

Json encode_completion(const Completion& c) {
  Json j{{"texts", c.texts}, {"provider_meta", c.provider_meta}};
  if (c.per_token_logprobs) j["per_token_logprobs"] = *c.per_token_logprobs;
  return j;
}

Completion decode_completion(const Json& j) {
  Completion c;
  c.texts = json_field::require(j, "texts").get<std::vector<std::string>>();
  if (auto it = j.find("per_token_logprobs"); it != j.end()) {
    c.per_token_logprobs = it->get<std::vector<std::vector<double>>>();
  }
  if (auto it = j.find("provider_meta"); it != j.end()) c.provider_meta = *it;
  return c;
}

}  // namespace judgeforge::gateway
