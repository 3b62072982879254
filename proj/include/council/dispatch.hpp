#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "council/agent.hpp"
#include "council/errors.hpp"

namespace council {

struct LatencyBreakdown {
  std::vector<std::pair<std::string, double>> expert_latencies;  // expert_id -> seconds
  double synthesis_latency = 0.0;
  double total = 0.0;
};

/// Streaming hook: (expert_id, delta chunk).
using ExpertDeltaCallback = std::function<void(const std::string&, std::string_view)>;

namespace detail {

struct DispatchSlot {
  std::mutex mutex;
  std::condition_variable done_cv;
  bool done = false;
  ExpertOutcome outcome;
};

}  // namespace detail

/// Fan a query out to all experts concurrently. Wall-clock duration is
/// bounded by the slowest expert (plus scheduling overhead), never the sum.
/// A per-expert timeout yields status = Timeout for that expert without
/// aborting its siblings; outcomes come back in expert order.
inline std::vector<ExpertOutcome> dispatch_parallel(const std::string& query,
                                                    const Session& history,
                                                    const std::vector<AgentPtr>& experts,
                                                    double timeout_seconds = 60.0,
                                                    const ExpertDeltaCallback& on_delta = {}) {
  if (experts.empty()) throw InvalidInputError("dispatch requires at least one expert");
  if (timeout_seconds <= 0.0) throw InvalidInputError("dispatch timeout must be positive");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(timeout_seconds));

  std::vector<std::shared_ptr<detail::DispatchSlot>> slots;
  std::vector<CancelToken> cancels;
  slots.reserve(experts.size());
  for (const auto& expert : experts) {
    auto slot = std::make_shared<detail::DispatchSlot>();
    auto cancel = std::make_shared<std::atomic<bool>>(false);
    slots.push_back(slot);
    cancels.push_back(cancel);

    DeltaCallback expert_delta;
    if (on_delta) {
      expert_delta = [on_delta, id = expert->id()](std::string_view chunk) {
        on_delta(id, chunk);
      };
    }
    AgentRequest request{query, history, cancel, std::move(expert_delta)};
    // The thread owns its slot via shared_ptr: if we abandon it on timeout
    // it can still finish writing safely.
    std::thread([slot, cancel, expert, request = std::move(request), start]() {
      ExpertOutcome outcome;
      outcome.expert_id = expert->id();
      try {
        std::string body = expert->complete(request);
        outcome.status = OutcomeStatus::Success;
        outcome.response = ExpertResponse{expert->id(), std::move(body)};
      } catch (const std::exception& e) {
        outcome.status = OutcomeStatus::ProviderError;
        outcome.error_message = e.what();
      }
      outcome.latency_seconds =
          std::chrono::duration<double>(clock::now() - start).count();
      std::lock_guard<std::mutex> lock(slot->mutex);
      slot->outcome = std::move(outcome);
      slot->done = true;
      slot->done_cv.notify_all();
    }).detach();
  }

  std::vector<ExpertOutcome> outcomes;
  outcomes.reserve(experts.size());
  for (std::size_t i = 0; i < experts.size(); ++i) {
    auto& slot = *slots[i];
    std::unique_lock<std::mutex> lock(slot.mutex);
    if (!slot.done_cv.wait_until(lock, deadline, [&] { return slot.done; })) {
      cancels[i]->store(true);
      ExpertOutcome timed_out;
      timed_out.expert_id = experts[i]->id();
      timed_out.status = OutcomeStatus::Timeout;
      timed_out.latency_seconds = std::chrono::duration<double>(clock::now() - start).count();
      timed_out.error_message = "expert exceeded per-dispatch timeout";
      outcomes.push_back(std::move(timed_out));
    } else {
      outcomes.push_back(slot.outcome);
    }
  }
  return outcomes;
}

/// Keep the successful responses if they meet the quorum; the returned
/// count is the effective N for downstream partitioning.
inline std::vector<ExpertResponse> collect_quorum(const std::vector<ExpertOutcome>& outcomes,
                                                  int min_success) {
  if (min_success < 1) throw InvalidInputError("quorum min_success must be >= 1");
  std::vector<ExpertResponse> responses;
  std::vector<std::string> failed;
  for (const auto& outcome : outcomes) {
    if (outcome.status == OutcomeStatus::Success && outcome.response) {
      responses.push_back(*outcome.response);
    } else {
      failed.push_back(outcome.expert_id);
    }
  }
  if (responses.size() < static_cast<std::size_t>(min_success)) {
    std::string msg = "quorum failure: " + std::to_string(responses.size()) + " of " +
                      std::to_string(outcomes.size()) + " experts succeeded (need " +
                      std::to_string(min_success) + "); failed:";
    for (const auto& id : failed) msg += " " + id;
    throw QuorumError(msg, std::move(failed));
  }
  return responses;
}

/// Convenience factory mirroring the scripted-expert test harness.
inline AgentPtr scripted_expert(std::string id, std::map<std::string, ScriptEntry> script) {
  if (script.empty()) throw InvalidInputError("scripted expert needs a non-empty script");
  return std::make_shared<ScriptedExpert>(std::move(id), std::move(script));
}

}  // namespace council
