#include "httplib.h"

#include "judgeforge/gateway/http_provider.hpp"

#include <algorithm>

namespace judgeforge::gateway {

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("HttpProvider: base_url needs a scheme: " + config_.base_url);
  }
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  origin_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ProviderReply parse_chat_completion(const Json& body) {
  const Json& choices = json_field::require(body, "choices");
  if (!choices.is_array()) throw SchemaError("choices", "expected array");
  std::vector<std::pair<std::int64_t, const Json*>> ordered;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    ordered.emplace_back(choices[i].value("index", static_cast<std::int64_t>(i)), &choices[i]);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  ProviderReply reply;
  std::vector<std::vector<double>> logprobs;
  bool have_logprobs = false;
  for (const auto& [index, choice] : ordered) {
    const Json& msg = json_field::require(*choice, "message");
    const Json& content = json_field::require(msg, "content");
    reply.texts.push_back(content.is_string() ? content.get<std::string>() : std::string{});
    std::vector<double> seq;
    if (auto lp = choice->find("logprobs"); lp != choice->end() && lp->is_object()) {
      if (auto c = lp->find("content"); c != lp->end() && c->is_array()) {
        have_logprobs = true;
        for (const Json& tok : *c) seq.push_back(json_field::number(tok, "logprob"));
      }
    }
    logprobs.push_back(std::move(seq));
  }
  if (have_logprobs) reply.logprobs = std::move(logprobs);
  if (auto it = body.find("usage"); it != body.end()) reply.meta["usage"] = *it;
  if (auto it = body.find("model"); it != body.end()) reply.meta["model"] = *it;
  return reply;
}

ProviderReply HttpProvider::send(const CompletionRequest& request) {
  httplib::Client client(origin_);
  const auto t = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_connection_timeout(t, 0);
  client.set_read_timeout(t, 0);
  client.set_write_timeout(t, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const std::string body = encode_request(request).dump(-1, ' ', false, Json::error_handler_t::replace);
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    ProviderReply r = ProviderReply::timeout();
    r.error_message = httplib::to_string(res.error());
    return r;
  }
  if (res->status != 200) return ProviderReply::failure(res->status, res->body);
  try {
    return parse_chat_completion(Json::parse(res->body));
  } catch (const std::exception& e) {
    // A 200 with an unreadable body is treated as a server fault.
    return ProviderReply::failure(502, std::string("malformed response: ") + e.what());
  }
}

}  // namespace judgeforge::gateway
