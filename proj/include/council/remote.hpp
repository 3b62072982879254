#pragma once

#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "council/agent.hpp"
#include "council/errors.hpp"

namespace council {

/// Environment variable carrying the credential for a provider, e.g.
/// provider "openai" -> OPENAI_API_KEY.
inline std::string provider_credential_var(const std::string& provider) {
  std::string var;
  for (unsigned char c : provider) {
    var.push_back(std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_');
  }
  return var + "_API_KEY";
}

/// Generic chat-completion client over a configurable endpoint. One attempt,
/// no provider-side retries. Scripted and remote agents are interchangeable
/// behind ExpertAgent.
class HttpChatAgent final : public ExpertAgent {
 public:
  /// `endpoint` is "host[:port]" (plain HTTP) or "http://host[:port]";
  /// `path` defaults to the OpenAI-style chat completions route.
  HttpChatAgent(ExpertSpec spec, std::string endpoint,
                std::string path = "/v1/chat/completions")
      : spec_(std::move(spec)), endpoint_(std::move(endpoint)), path_(std::move(path)) {}

  std::string id() const override { return spec_.expert_id; }
  const ExpertSpec& spec() const { return spec_; }

  std::string complete(const AgentRequest& request) override {
    nlohmann::json body;
    body["model"] = spec_.model_id;
    nlohmann::json messages = nlohmann::json::array();
    const Session history = truncate_history(request.history, spec_.context_budget);
    for (const auto& turn : history.turns)
      messages.push_back({{"role", turn.role}, {"content", turn.content}});
    messages.push_back({{"role", "user"}, {"content", request.query}});
    body["messages"] = std::move(messages);
    body["temperature"] = spec_.generation.temperature;
    body["top_p"] = spec_.generation.top_p;
    body["max_tokens"] = spec_.generation.max_new_tokens;

    httplib::Client client(endpoint_);
    httplib::Headers headers;
    if (const char* key = std::getenv(provider_credential_var(spec_.provider).c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
      throw AgentError(spec_.expert_id, "provider unreachable at " + endpoint_);
    if (res->status != 200)
      throw AgentError(spec_.expert_id,
                       "provider returned status " + std::to_string(res->status));
    try {
      const auto parsed = nlohmann::json::parse(res->body);
      std::string text =
          parsed.at("choices").at(0).at("message").at("content").get<std::string>();
      if (request.on_delta) request.on_delta(text);
      return text;
    } catch (const nlohmann::json::exception& e) {
      throw AgentError(spec_.expert_id, std::string("malformed provider response: ") + e.what());
    }
  }

 private:
  ExpertSpec spec_;
  std::string endpoint_;
  std::string path_;
};

}  // namespace council
