#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "council/council.hpp"
#include "council/transcript.hpp"

namespace council {

enum class SseEventType {
  CouncilStarted,
  TriageDecided,
  ExpertStarted,
  ExpertDelta,
  ExpertCompleted,
  ExpertFailed,
  SynthesisStarted,
  SynthesisDelta,
  FinalReport,
  CouncilError,
};

inline std::string sse_event_name(SseEventType type) {
  switch (type) {
    case SseEventType::CouncilStarted: return "council_started";
    case SseEventType::TriageDecided: return "triage_decided";
    case SseEventType::ExpertStarted: return "expert_started";
    case SseEventType::ExpertDelta: return "expert_delta";
    case SseEventType::ExpertCompleted: return "expert_completed";
    case SseEventType::ExpertFailed: return "expert_failed";
    case SseEventType::SynthesisStarted: return "synthesis_started";
    case SseEventType::SynthesisDelta: return "synthesis_delta";
    case SseEventType::FinalReport: return "final_report";
    case SseEventType::CouncilError: return "council_error";
  }
  return "council_error";
}

struct SseEvent {
  SseEventType event_type = SseEventType::CouncilError;
  std::string session_id;
  std::optional<std::string> expert_id;
  std::uint64_t sequence = 0;  // strictly increasing per session
  nlohmann::json payload = nlohmann::json::object();
};

/// Standard SSE framing: `event:` line, single-line `data:` payload,
/// blank-line terminator.
inline std::string format_sse(const SseEvent& event) {
  nlohmann::json data = event.payload;
  data["session_id"] = event.session_id;
  data["sequence"] = event.sequence;
  if (event.expert_id) data["expert_id"] = *event.expert_id;
  return "event: " + sse_event_name(event.event_type) + "\n" + "data: " + data.dump() + "\n\n";
}

inline std::string sse_heartbeat() { return ": heartbeat\n\n"; }

using SseSubscriber = std::function<void(const SseEvent&)>;

/// Run the council while streaming its progress as SSE events. Emission is
/// serialized per session; deltas from distinct experts may interleave but
/// each expert's own events stay ordered. Exactly one of final_report /
/// council_error closes the run (the error case rethrows after emitting).
inline CouncilResult stream_council(const std::string& query, const Session& history,
                                    const CouncilSetup& setup, const std::string& session_id,
                                    const SseSubscriber& subscriber) {
  std::mutex emit_mutex;
  std::uint64_t next_sequence = 0;
  auto emit = [&](SseEventType type, std::optional<std::string> expert_id,
                  nlohmann::json payload) {
    std::lock_guard<std::mutex> lock(emit_mutex);
    SseEvent event;
    event.event_type = type;
    event.session_id = session_id;
    event.expert_id = std::move(expert_id);
    event.sequence = next_sequence++;
    event.payload = std::move(payload);
    // A subscriber disconnect throws out of `subscriber`; swallow it so the
    // council run still completes and persists.
    try {
      subscriber(event);
    } catch (...) {
    }
  };

  emit(SseEventType::CouncilStarted, std::nullopt, {{"query", query}});

  CouncilObserver observer;
  observer.on_triage = [&](const TriageDecision& decision) {
    emit(SseEventType::TriageDecided, std::nullopt,
         transcript_json::to_json(decision));
  };
  observer.on_expert_started = [&](const std::string& id) {
    emit(SseEventType::ExpertStarted, id, nlohmann::json::object());
  };
  observer.on_expert_delta = [&](const std::string& id, std::string_view chunk) {
    emit(SseEventType::ExpertDelta, id, {{"delta", std::string(chunk)}});
  };
  observer.on_expert_terminal = [&](const ExpertOutcome& outcome) {
    const bool ok = outcome.status == OutcomeStatus::Success;
    emit(ok ? SseEventType::ExpertCompleted : SseEventType::ExpertFailed, outcome.expert_id,
         transcript_json::to_json(outcome));
  };
  observer.on_synthesis_started = [&] {
    emit(SseEventType::SynthesisStarted, std::nullopt, nlohmann::json::object());
  };
  observer.on_synthesis_delta = [&](std::string_view chunk) {
    emit(SseEventType::SynthesisDelta, std::nullopt, {{"delta", std::string(chunk)}});
  };

  try {
    CouncilResult result = run_council(query, history, setup, &observer);
    nlohmann::json payload;
    payload["report"] = transcript_json::to_json(result.report);
    payload["bypassed"] = result.bypassed;
    payload["direct_answer"] =
        result.direct_answer ? nlohmann::json(*result.direct_answer) : nlohmann::json(nullptr);
    emit(SseEventType::FinalReport, std::nullopt, std::move(payload));
    return result;
  } catch (const std::exception& e) {
    emit(SseEventType::CouncilError, std::nullopt, {{"error", e.what()}});
    throw;
  }
}

}  // namespace council
