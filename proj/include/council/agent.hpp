#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "council/errors.hpp"
#include "council/text.hpp"

namespace council {

struct ChatMessage {
  std::string role;  // "user" | "assistant" | "system"
  std::string content;
};

/// Conversation history handed to every expert alongside the query.
struct Session {
  std::vector<ChatMessage> turns;
};

enum class ReasoningLevel { Minimal, Default, High, Maximum };

struct GenerationParams {
  double temperature = 0.5;
  double top_p = 0.95;
  int max_new_tokens = 4096;
  ReasoningLevel reasoning_level = ReasoningLevel::Default;
};

struct ExpertSpec {
  std::string expert_id;
  std::string provider;
  std::string model_id;
  int context_budget = 128000;  // tokens
  GenerationParams generation;
  bool web_enabled = false;
};

enum class OutcomeStatus { Success, Timeout, ProviderError };

struct ExpertResponse {
  std::string expert_id;
  std::string text;
};

struct ExpertOutcome {
  std::string expert_id;
  OutcomeStatus status = OutcomeStatus::ProviderError;
  std::optional<ExpertResponse> response;
  double latency_seconds = 0.0;
  std::string error_message;
};

using CancelToken = std::shared_ptr<std::atomic<bool>>;
using DeltaCallback = std::function<void(std::string_view)>;

struct AgentRequest {
  std::string query;
  Session history;
  CancelToken cancel;      // optional; set when the caller gave up waiting
  DeltaCallback on_delta;  // optional; streaming consumers only
};

/// Abstract chat agent. Experts, the synthesizer, the server-side triage
/// classifier, and claim extractors all sit behind this interface so that
/// scripted and remote agents are interchangeable.
class ExpertAgent {
 public:
  virtual ~ExpertAgent() = default;
  virtual std::string id() const = 0;
  /// Returns the full response text; throws AgentError on failure.
  /// Must tolerate concurrent invocation.
  virtual std::string complete(const AgentRequest& request) = 0;
};

using AgentPtr = std::shared_ptr<ExpertAgent>;

/// Drop oldest turns first until the serialized history fits the budget.
/// Tokens are counted whitespace-delimited; each expert truncates
/// independently against its own context budget.
inline Session truncate_history(const Session& history, int context_budget_tokens) {
  if (context_budget_tokens <= 0) throw InvalidInputError("context budget must be positive");
  std::vector<std::size_t> counts;
  counts.reserve(history.turns.size());
  std::size_t total = 0;
  for (const auto& turn : history.turns) {
    counts.push_back(text::token_count(turn.content));
    total += counts.back();
  }
  std::size_t drop = 0;
  while (drop < history.turns.size() && total > static_cast<std::size_t>(context_budget_tokens)) {
    total -= counts[drop];
    ++drop;
  }
  Session out;
  out.turns.assign(history.turns.begin() + static_cast<std::ptrdiff_t>(drop),
                   history.turns.end());
  return out;
}

/// Sleep in short slices so an abandoned call returns promptly once the
/// dispatcher sets the cancel token.
inline void cooperative_sleep(double seconds, const CancelToken& cancel) {
  using namespace std::chrono;
  const auto deadline =
      steady_clock::now() + duration_cast<steady_clock::duration>(duration<double>(seconds));
  while (steady_clock::now() < deadline) {
    if (cancel && cancel->load()) return;
    std::this_thread::sleep_for(milliseconds(5));
  }
}

// ---------------------------------------------------------------------------
// Scripted agent: deterministic desk-scale stand-in for remote providers.
// ---------------------------------------------------------------------------

struct ScriptEntry {
  std::string text;
  double latency_seconds = 0.0;
  bool fail = false;                // simulate a provider error for this key
  std::string error_message = "scripted provider error";
};

class ScriptedExpert final : public ExpertAgent {
 public:
  ScriptedExpert(std::string id, std::map<std::string, ScriptEntry> script)
      : id_(std::move(id)), script_(std::move(script)) {}

  /// Lenient mode: unknown queries get `fallback` instead of an error.
  ScriptedExpert& set_fallback(std::string fallback) {
    fallback_ = std::move(fallback);
    return *this;
  }

  std::string id() const override { return id_; }

  std::string complete(const AgentRequest& request) override {
    const auto it = script_.find(text::normalize(request.query));
    const ScriptEntry* entry = nullptr;
    if (it != script_.end()) {
      entry = &it->second;
    } else if (!fallback_) {
      throw AgentError(id_, "scripted-miss: no script entry for query and strict mode set");
    }
    const double latency = entry ? entry->latency_seconds : 0.0;
    cooperative_sleep(latency, request.cancel);
    if (entry && entry->fail) throw AgentError(id_, entry->error_message);
    const std::string& body = entry ? entry->text : *fallback_;
    if (request.on_delta) {
      for (const auto& word : text::split_whitespace(body)) request.on_delta(word);
    }
    return body;
  }

 private:
  std::string id_;
  std::map<std::string, ScriptEntry> script_;
  std::optional<std::string> fallback_;
};

}  // namespace council
