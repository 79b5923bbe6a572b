#include "judgeforge/gateway/mock_provider.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "judgeforge/core/records.hpp"

namespace judgeforge::gateway {

std::string last_user_message(const CompletionRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == Role::user) return it->content;
  }
  return {};
}

std::string mock_judgment_text(char position, std::string_view reasoning) {
  std::string out = reasoning.empty()
                        ? std::string("Both answers were analyzed step by step.")
                        : std::string(reasoning);
  out += "\n\n[[";
  out.push_back(position);
  out += "]]";
  return out;
}

MockProvider::MockProvider(Handler handler) : MockProvider(std::move(handler), Options{}) {}

MockProvider::MockProvider(Handler handler, Options options)
    : handler_(std::move(handler)), options_(options) {
  if (!handler_) throw std::invalid_argument("MockProvider: handler is empty");
}

std::shared_ptr<MockProvider> MockProvider::echo() {
  return std::make_shared<MockProvider>([](const CompletionRequest& r) {
    return ProviderReply::success(std::vector<std::string>(r.n, last_user_message(r)));
  });
}

ProviderReply MockProvider::send(const CompletionRequest& request) {
  ++calls_;
  const std::size_t now = ++in_flight_;
  std::size_t peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);
  ProviderReply reply;
  try {
    reply = handler_(request);
  } catch (...) {
    --in_flight_;
    throw;
  }
  --in_flight_;
  return reply;
}

namespace {

struct ScriptRule {
  std::vector<std::string> contains;
  std::optional<std::string> model;
  std::vector<Json> actions;
  bool cycle = false;
  std::size_t cursor = 0;

  bool matches(const CompletionRequest& r) const {
    if (model && r.model != *model) return false;
    const std::string prompt = last_user_message(r);
    for (const auto& needle : contains) {
      if (prompt.find(needle) == std::string::npos) return false;
    }
    return true;
  }

  const Json& next_action() {
    const Json& a = actions[cycle ? cursor % actions.size() : std::min(cursor, actions.size() - 1)];
    ++cursor;
    return a;
  }
};

ProviderReply apply_action(const Json& action, const CompletionRequest& r) {
  if (!action.is_object()) throw SchemaError("action", "expected object");
  const int n = r.n;
  ProviderReply reply;
  if (action.contains("error")) {
    reply = ProviderReply::failure(action.at("error").get<int>(),
                                   action.value("message", std::string("scripted failure")));
  } else if (action.value("timeout", false)) {
    reply = ProviderReply::timeout();
  } else if (action.contains("texts")) {
    auto texts = action.at("texts").get<std::vector<std::string>>();
    if (static_cast<int>(texts.size()) < n) {
      throw SchemaError("texts", "script supplies fewer texts than requested n");
    }
    texts.resize(static_cast<std::size_t>(n));
    reply = ProviderReply::success(std::move(texts));
  } else if (action.contains("text")) {
    reply = ProviderReply::success(
        std::vector<std::string>(static_cast<std::size_t>(n), action.at("text").get<std::string>()));
  } else if (action.value("echo", false)) {
    reply = ProviderReply::success(std::vector<std::string>(static_cast<std::size_t>(n), last_user_message(r)));
  } else if (action.contains("prefer")) {
    const std::string prompt = last_user_message(r);
    const auto x = prompt.find(action.at("prefer").get<std::string>());
    const auto y = prompt.find(action.at("over").get<std::string>());
    const std::string reasoning = action.value("reasoning", std::string{});
    std::string text;
    if (x == std::string::npos || y == std::string::npos) {
      text = reasoning.empty() ? "Unable to reach a verdict." : reasoning;
    } else {
      text = mock_judgment_text(x < y ? 'A' : 'B', reasoning);
    }
    reply = ProviderReply::success(std::vector<std::string>(static_cast<std::size_t>(n), text));
  } else {
    throw SchemaError("action", "unknown mock action " + action.dump());
  }
  if (action.contains("logprobs")) {
    reply.logprobs = action.at("logprobs").get<std::vector<std::vector<double>>>();
  }
  return reply;
}

}  // namespace

std::shared_ptr<MockProvider> MockProvider::from_script(const Json& script) {
  if (!script.is_object()) throw SchemaError("script", "expected object");
  auto rules = std::make_shared<std::vector<ScriptRule>>();
  if (auto it = script.find("rules"); it != script.end()) {
    for (const Json& jr : *it) {
      ScriptRule rule;
      if (auto w = jr.find("when"); w != jr.end()) {
        if (auto c = w->find("contains"); c != w->end()) {
          if (c->is_string()) {
            rule.contains.push_back(c->get<std::string>());
          } else {
            rule.contains = c->get<std::vector<std::string>>();
          }
        }
        if (auto m = w->find("model"); m != w->end()) rule.model = m->get<std::string>();
      }
      const Json& respond = json_field::require(jr, "respond");
      if (respond.is_array()) {
        for (const Json& a : respond) rule.actions.push_back(a);
      } else {
        rule.actions.push_back(respond);
      }
      if (rule.actions.empty()) throw SchemaError("respond", "rule has no actions");
      rule.cycle = jr.value("cycle", false);
      rules->push_back(std::move(rule));
    }
  }
  const Json fallback = script.value("default", Json{{"echo", true}});
  auto mu = std::make_shared<std::mutex>();
  Options opts;
  opts.supports_n = script.value("supports_n", true);
  opts.supports_logprobs = script.value("supports_logprobs", false);
  return std::make_shared<MockProvider>(
      [rules, fallback, mu](const CompletionRequest& r) {
        Json action;
        {
          std::lock_guard lock(*mu);
          action = fallback;
          for (auto& rule : *rules) {
            if (rule.matches(r)) {
              action = rule.next_action();
              break;
            }
          }
        }
        return apply_action(action, r);
      },
      opts);
}

std::shared_ptr<MockProvider> MockProvider::from_script_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mock script " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_script(Json::parse(ss.str()));
}

}  // namespace judgeforge::gateway
