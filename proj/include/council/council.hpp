#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "council/agent.hpp"
#include "council/claims.hpp"
#include "council/dispatch.hpp"
#include "council/errors.hpp"
#include "council/synthesis.hpp"
#include "council/triage.hpp"

namespace council {

enum class SynthesisMode { Structured, MajorityVote };

/// Fully wired runtime configuration for one council.
struct CouncilSetup {
  TriageConfig triage;
  bool triage_enabled = true;
  std::vector<AgentPtr> experts;
  AgentPtr synthesizer;
  AgentPtr server_classifier;  // required when triage_enabled
  std::shared_ptr<ClaimExtractor> extractor = std::make_shared<SentenceClaimExtractor>();
  std::shared_ptr<ClaimMatcher> matcher = std::make_shared<NormalizedTextMatcher>();
  std::shared_ptr<ContradictionDetector> detector = std::make_shared<ScriptedDetector>();
  SynthesisPromptTemplate synthesis_template;
  SynthesisMode synthesis_mode = SynthesisMode::Structured;
  int min_success = 2;
  double timeout_seconds = 60.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (experts.empty()) throw InvalidInputError("council needs at least one expert");
    if (!synthesizer) throw InvalidInputError("council needs a synthesizer");
    if (triage_enabled && !server_classifier)
      throw InvalidInputError("triage requires a server classifier agent");
    if (min_success < 2) throw InvalidInputError("council quorum must be >= 2");
    triage.validate();
    synthesis_template.validate();
  }
};

struct CouncilResult {
  std::string query;
  TriageDecision triage;
  bool bypassed = false;
  std::optional<std::string> direct_answer;  // set on bypass
  std::vector<ExpertOutcome> outcomes;
  std::vector<ExpertResponse> responses;  // quorum survivors, effective N
  ClaimPartition partition;
  std::vector<ContradictionPair> contradictions;
  std::string synthesis_prompt;
  SynthesisReport report;
  LatencyBreakdown latency;
  std::uint64_t seed = 0;
};

/// Progress hooks for streaming consumers; every member is optional.
struct CouncilObserver {
  std::function<void(const TriageDecision&)> on_triage;
  std::function<void(const std::string&)> on_expert_started;
  ExpertDeltaCallback on_expert_delta;
  std::function<void(const ExpertOutcome&)> on_expert_terminal;
  std::function<void()> on_synthesis_started;
  std::function<void(std::string_view)> on_synthesis_delta;
};

/// The end-to-end council run: triage, parallel dispatch, quorum, claim
/// pipeline, synthesis. Quorum and synthesis failures carry the partial
/// transcript via the exception message where available.
inline CouncilResult run_council(const std::string& query, const Session& history,
                                 const CouncilSetup& setup,
                                 const CouncilObserver* observer = nullptr) {
  setup.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  CouncilResult result;
  result.query = query;
  result.seed = setup.seed;

  if (setup.triage_enabled) {
    result.triage = triage_query(query, history, setup.triage, *setup.server_classifier);
    if (observer && observer->on_triage) observer->on_triage(result.triage);
    if (result.triage.outcome == TriageOutcome::Bypass) {
      result.bypassed = true;
      result.direct_answer = result.triage.direct_answer;
      if (!result.direct_answer) result.direct_answer = "(trivial query; no further answer)";
      result.latency.total = std::chrono::duration<double>(clock::now() - start).count();
      return result;
    }
  } else {
    result.triage.outcome = TriageOutcome::Council;
    if (observer && observer->on_triage) observer->on_triage(result.triage);
  }

  if (observer && observer->on_expert_started)
    for (const auto& expert : setup.experts) observer->on_expert_started(expert->id());
  result.outcomes = dispatch_parallel(query, history, setup.experts, setup.timeout_seconds,
                                      observer ? observer->on_expert_delta : ExpertDeltaCallback{});
  for (const auto& outcome : result.outcomes) {
    result.latency.expert_latencies.emplace_back(outcome.expert_id, outcome.latency_seconds);
    if (observer && observer->on_expert_terminal) observer->on_expert_terminal(outcome);
  }
  result.responses = collect_quorum(result.outcomes, setup.min_success);

  std::vector<std::pair<std::string, std::vector<Claim>>> claim_sets;
  std::vector<Claim> all_claims;
  for (const auto& response : result.responses) {
    auto claims = extract_claims(response, *setup.extractor);
    all_claims.insert(all_claims.end(), claims.begin(), claims.end());
    claim_sets.emplace_back(response.expert_id, std::move(claims));
  }
  const auto supports = build_support_map(claim_sets, *setup.matcher);
  result.partition = partition_claims(supports, static_cast<int>(result.responses.size()));
  result.contradictions = detect_contradictions(all_claims, *setup.detector);

  const auto synthesis_start = clock::now();
  if (observer && observer->on_synthesis_started) observer->on_synthesis_started();
  if (setup.synthesis_mode == SynthesisMode::MajorityVote) {
    // Ablation: modal full answer instead of structured synthesis.
    result.report.partition = result.partition;
    result.report.contradictions = result.contradictions;
    result.report.analysis_section = majority_vote_baseline(
        result.responses,
        [](const ExpertResponse& r) -> std::optional<std::string> {
          const std::string t = text::trim(r.text);
          if (t.empty()) return std::nullopt;
          return t;
        });
    result.report.degraded_structure = false;
  } else {
    result.synthesis_prompt = construct_synthesis_prompt(result.partition, result.contradictions,
                                                         setup.synthesis_template, query);
    DeltaCallback synth_delta;
    if (observer && observer->on_synthesis_delta) {
      synth_delta = [observer](std::string_view chunk) { observer->on_synthesis_delta(chunk); };
    }
    result.report = synthesize_structured(result.synthesis_prompt, *setup.synthesizer,
                                          setup.synthesis_template, synth_delta);
    result.report.partition = result.partition;
    result.report.contradictions = result.contradictions;
  }
  const auto end = clock::now();
  result.latency.synthesis_latency = std::chrono::duration<double>(end - synthesis_start).count();
  result.latency.total = std::chrono::duration<double>(end - start).count();
  return result;
}

}  // namespace council
