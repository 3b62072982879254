#pragma once

// Shared helper: verify the per-session SSE event-order invariants over a
// captured event list. Returns a list of violations (empty means clean).

#include <map>
#include <set>
#include <string>
#include <vector>

#include "council/sse.hpp"

namespace sse_checks {

inline std::vector<std::string> verify_session(const std::vector<council::SseEvent>& events) {
  using council::SseEventType;
  std::vector<std::string> violations;
  auto violation = [&](const std::string& msg) { violations.push_back(msg); };

  if (events.empty()) {
    violation("no events");
    return violations;
  }
  if (events.front().event_type != SseEventType::CouncilStarted)
    violation("first event is not council_started");

  std::uint64_t expected_seq = 0;
  std::map<std::string, int> started, terminal;
  std::map<std::string, bool> expert_done;
  int finals = 0, errors = 0;
  bool saw_terminal_event = false;

  for (const auto& e : events) {
    if (e.session_id != events.front().session_id) violation("mixed session ids");
    if (e.sequence != expected_seq)
      violation("sequence gap: expected " + std::to_string(expected_seq) + " got " +
                std::to_string(e.sequence));
    ++expected_seq;
    if (saw_terminal_event) violation("event after final_report/council_error");

    switch (e.event_type) {
      case SseEventType::ExpertStarted:
        ++started[*e.expert_id];
        break;
      case SseEventType::ExpertDelta:
        if (started[*e.expert_id] == 0) violation("delta before expert_started");
        if (expert_done[*e.expert_id]) violation("delta after expert terminal event");
        break;
      case SseEventType::ExpertCompleted:
      case SseEventType::ExpertFailed:
        if (started[*e.expert_id] == 0) violation("terminal before expert_started");
        ++terminal[*e.expert_id];
        expert_done[*e.expert_id] = true;
        break;
      case SseEventType::FinalReport:
        ++finals;
        saw_terminal_event = true;
        break;
      case SseEventType::CouncilError:
        ++errors;
        saw_terminal_event = true;
        break;
      default:
        break;
    }
  }

  if (finals + errors != 1) violation("expected exactly one terminal event");
  for (const auto& [id, n] : started) {
    if (n != 1) violation("expert " + id + " started " + std::to_string(n) + " times");
    if (terminal[id] != 1)
      violation("expert " + id + " has " + std::to_string(terminal[id]) + " terminal events");
  }
  for (const auto& [id, n] : terminal) {
    if (started.find(id) == started.end()) violation("terminal for unstarted expert " + id);
  }
  return violations;
}

}  // namespace sse_checks
