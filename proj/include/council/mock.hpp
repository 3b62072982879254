#pragma once

#include <memory>
#include <string>
#include <vector>

#include "council/agent.hpp"
#include "council/text.hpp"
#include "council/triage.hpp"

namespace council {

/// Mock server-side triage classifier: applies the same thresholds as the
/// client stage and answers greetings directly. Deterministic stand-in for
/// the lightweight LLM call.
class HeuristicClassifierAgent final : public ExpertAgent {
 public:
  explicit HeuristicClassifierAgent(TriageConfig cfg, std::string id = "server-classifier")
      : cfg_(std::move(cfg)), id_(std::move(id)) {}

  std::string id() const override { return id_; }

  std::string complete(const AgentRequest& request) override {
    if (classify_client(request.query, cfg_) == Verdict::Nontrivial) return "NONTRIVIAL";
    const std::string normalized = text::normalize(request.query);
    for (const auto& pattern : cfg_.greeting_patterns) {
      if (normalized == text::normalize(pattern)) return "TRIVIAL: Hello! How can I help you?";
    }
    return "TRIVIAL";
  }

 private:
  TriageConfig cfg_;
  std::string id_;
};

/// Deterministic mock expert for end-to-end runs. The emitted sentences are
/// constructed so that across a council of `council_size` experts there is
/// one consensus claim, one claim shared by all but the last expert, and
/// one unique claim per expert.
class MockCouncilExpert final : public ExpertAgent {
 public:
  MockCouncilExpert(std::string id, int index, int council_size, double latency_seconds = 0.0)
      : id_(std::move(id)), index_(index), council_size_(council_size),
        latency_seconds_(latency_seconds) {}

  std::string id() const override { return id_; }

  std::string complete(const AgentRequest& request) override {
    if (latency_seconds_ > 0.0) cooperative_sleep(latency_seconds_, request.cancel);
    const std::string topic = text::normalize(request.query);
    std::string body = "All experts agree on the core answer to " + topic + ".";
    if (index_ + 1 < council_size_)
      body += " Most experts also note a secondary aspect of " + topic + ".";
    body += " Expert " + id_ + " adds a unique observation about " + topic + ".";
    if (request.on_delta)
      for (const auto& word : text::split_whitespace(body)) request.on_delta(word);
    return body;
  }

 private:
  std::string id_;
  int index_;
  int council_size_;
  double latency_seconds_;
};

/// Deterministic mock synthesizer: lifts the claim bullets out of the
/// synthesis prompt and reproduces them under the five required headers.
class EchoSynthesizer final : public ExpertAgent {
 public:
  explicit EchoSynthesizer(std::string id = "mock-synthesizer", double latency_seconds = 0.0)
      : id_(std::move(id)), latency_seconds_(latency_seconds) {}

  std::string id() const override { return id_; }

  std::string complete(const AgentRequest& request) override {
    if (latency_seconds_ > 0.0) cooperative_sleep(latency_seconds_, request.cancel);
    const std::string consensus = bullets_after(request.query, "Consensus claims");
    const std::string partial = bullets_after(request.query, "Partial-agreement claims");
    const std::string disagree = bullets_after(request.query, "Contradictions:");
    const std::string unique = bullets_after(request.query, "Unique claims");
    std::string body;
    body += "## FULL CONSENSUS\n" + (consensus.empty() ? "None." : consensus) + "\n";
    body += "## PARTIAL AGREEMENT\n" + (partial.empty() ? "None." : partial) + "\n";
    body += "## DISAGREEMENTS\n" + (disagree.empty() ? "None." : disagree) + "\n";
    body += "## UNIQUE FINDINGS\n" + (unique.empty() ? "None." : unique) + "\n";
    body += "## COMPREHENSIVE ANALYSIS\nSynthesized from the claim evidence above; "
            "consensus claims carry the most weight.\n";
    if (request.on_delta)
      for (const auto& word : text::split_whitespace(body)) request.on_delta(word);
    return body;
  }

 private:
  /// Collect the "  - ..." bullet lines following the given label line.
  static std::string bullets_after(const std::string& prompt, const std::string& label) {
    std::string out;
    std::size_t pos = prompt.find(label);
    if (pos == std::string::npos) return out;
    pos = prompt.find('\n', pos);
    while (pos != std::string::npos) {
      const std::size_t line_begin = pos + 1;
      const std::size_t line_end = prompt.find('\n', line_begin);
      const std::string line =
          prompt.substr(line_begin, line_end == std::string::npos ? std::string::npos
                                                                  : line_end - line_begin);
      if (line.rfind("  - ", 0) != 0) break;
      if (!out.empty()) out += "\n";
      out += "- " + text::trim(line.substr(4));
      pos = line_end;
    }
    return out;
  }

  std::string id_;
  double latency_seconds_;
};

}  // namespace council
