#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "council/agent.hpp"
#include "council/errors.hpp"
#include "council/text.hpp"

namespace council {

enum class Verdict { Trivial, Nontrivial };
enum class TriageOutcome { Bypass, Council };

struct TriageConfig {
  /// Case-insensitive exact-match patterns against the normalized query.
  std::vector<std::string> greeting_patterns = default_greeting_patterns();
  int max_chars = 18;   // character threshold
  int max_tokens = 4;   // whitespace-token threshold
  double server_temperature = 0.3;
  /// When true, the server classifier is consulted only if the client
  /// stage already said trivial.
  bool short_circuit = true;

  static std::vector<std::string> default_greeting_patterns() {
    return {"hi",        "hello",   "hey",          "hiya",      "yo",
            "good morning", "good afternoon", "good evening", "good night",
            "thanks",    "thank you", "thx",        "ty",        "ok",
            "okay",      "sure",    "cool",         "great",     "nice",
            "bye",       "goodbye", "see you",      "see ya",    "later",
            "no problem", "you're welcome", "got it", "sounds good"};
  }

  void validate() const {
    if (max_chars < 1) throw InvalidInputError("triage max_chars must be >= 1");
    if (max_tokens < 1) throw InvalidInputError("triage max_tokens must be >= 1");
    if (greeting_patterns.empty()) throw InvalidInputError("greeting pattern list must be non-empty");
  }
};

struct TriageDecision {
  Verdict client_verdict = Verdict::Nontrivial;
  std::optional<Verdict> server_verdict;
  TriageOutcome outcome = TriageOutcome::Council;
  std::optional<std::string> direct_answer;
  /// Set when the server classifier failed and the decision fell back
  /// to council.
  bool degraded = false;
};

struct TriageMetrics {
  double accuracy = 0.0;
  double false_bypass_rate = 0.0;
  double trivial_fraction = 0.0;
  double nontrivial_fraction = 0.0;
};

/// Client-side stage: trivial iff the normalized query matches a greeting
/// pattern, or it is short on both the character and token axes.
inline Verdict classify_client(std::string_view query, const TriageConfig& cfg) {
  cfg.validate();
  const std::string trimmed = text::trim(query);
  if (trimmed.empty()) throw InvalidInputError("query is empty after trimming");
  const std::string normalized = text::normalize(trimmed);
  for (const auto& pattern : cfg.greeting_patterns) {
    if (normalized == text::normalize(pattern)) return Verdict::Trivial;
  }
  const bool short_chars = trimmed.size() <= static_cast<std::size_t>(cfg.max_chars);
  const bool short_tokens = text::token_count(trimmed) <= static_cast<std::size_t>(cfg.max_tokens);
  return (short_chars && short_tokens) ? Verdict::Trivial : Verdict::Nontrivial;
}

/// Parses a server-classifier reply of the form "TRIVIAL[: answer]" or
/// "NONTRIVIAL". Anything else is a protocol violation.
inline std::pair<Verdict, std::optional<std::string>> parse_server_reply(
    std::string_view reply) {
  const std::string trimmed = text::trim(reply);
  const std::string lowered = text::to_lower(trimmed);
  auto after_tag = [&](std::size_t tag_len) -> std::optional<std::string> {
    std::string rest = text::trim(trimmed.substr(tag_len));
    if (!rest.empty() && rest.front() == ':') rest = text::trim(rest.substr(1));
    if (rest.empty()) return std::nullopt;
    return rest;
  };
  if (lowered.rfind("nontrivial", 0) == 0) return {Verdict::Nontrivial, std::nullopt};
  if (lowered.rfind("trivial", 0) == 0) return {Verdict::Trivial, after_tag(7)};
  throw AgentError("", "unparseable server classifier reply: " + trimmed);
}

/// Two-stage triage (client regex stage, then server classifier stage).
/// Bypass requires both stages to say trivial; any server failure degrades
/// to council.
inline TriageDecision triage_query(std::string_view query, const Session& history,
                                   const TriageConfig& cfg, ExpertAgent& server_classifier) {
  TriageDecision decision;
  decision.client_verdict = classify_client(query, cfg);

  if (decision.client_verdict == Verdict::Nontrivial && cfg.short_circuit) {
    decision.outcome = TriageOutcome::Council;
    return decision;
  }

  try {
    AgentRequest request{std::string(query), history, nullptr, nullptr};
    const auto [verdict, answer] = parse_server_reply(server_classifier.complete(request));
    decision.server_verdict = verdict;
    if (decision.client_verdict == Verdict::Trivial && verdict == Verdict::Trivial) {
      decision.outcome = TriageOutcome::Bypass;
      decision.direct_answer = answer;
    } else {
      decision.outcome = TriageOutcome::Council;
    }
  } catch (const AgentError&) {
    // Fail-safe: a broken classifier must never cause a wrong bypass.
    decision.server_verdict.reset();
    decision.outcome = TriageOutcome::Council;
    decision.degraded = true;
  }
  return decision;
}

struct LabeledQuery {
  std::string query;
  Verdict gold = Verdict::Nontrivial;
};

inline TriageMetrics evaluate_triage(const std::vector<LabeledQuery>& labeled,
                                     const TriageConfig& cfg, ExpertAgent& server_classifier) {
  if (labeled.empty()) throw InvalidInputError("labeled triage set is empty");
  std::size_t correct = 0, false_bypass = 0, predicted_trivial = 0;
  for (const auto& item : labeled) {
    const TriageDecision d = triage_query(item.query, Session{}, cfg, server_classifier);
    const bool bypassed = d.outcome == TriageOutcome::Bypass;
    const Verdict predicted = bypassed ? Verdict::Trivial : Verdict::Nontrivial;
    if (predicted == item.gold) ++correct;
    if (bypassed && item.gold == Verdict::Nontrivial) ++false_bypass;
    if (bypassed) ++predicted_trivial;
  }
  const double n = static_cast<double>(labeled.size());
  TriageMetrics m;
  m.accuracy = static_cast<double>(correct) / n;
  m.false_bypass_rate = static_cast<double>(false_bypass) / n;
  m.trivial_fraction = static_cast<double>(predicted_trivial) / n;
  m.nontrivial_fraction = 1.0 - m.trivial_fraction;
  return m;
}

}  // namespace council
