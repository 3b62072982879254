#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "council/council.hpp"
#include "council/errors.hpp"

#ifdef _WIN32
#include <io.h>
#else
#include <unistd.h>
#endif

namespace council {

inline constexpr int kTranscriptSchemaVersion = 1;

// ---------------------------------------------------------------------------
// JSON mapping. Keys are frozen; nlohmann's object ordering (alphabetical)
// plus shortest-round-trip doubles makes serialize -> parse -> serialize
// byte-identical.
// ---------------------------------------------------------------------------

namespace transcript_json {

using nlohmann::json;

inline std::string verdict_name(Verdict v) {
  return v == Verdict::Trivial ? "trivial" : "nontrivial";
}
inline Verdict verdict_from(const std::string& s) {
  if (s == "trivial") return Verdict::Trivial;
  if (s == "nontrivial") return Verdict::Nontrivial;
  throw StorageError("unknown verdict: " + s);
}

inline std::string status_name(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::Success: return "success";
    case OutcomeStatus::Timeout: return "timeout";
    case OutcomeStatus::ProviderError: return "provider_error";
  }
  return "provider_error";
}
inline OutcomeStatus status_from(const std::string& s) {
  if (s == "success") return OutcomeStatus::Success;
  if (s == "timeout") return OutcomeStatus::Timeout;
  if (s == "provider_error") return OutcomeStatus::ProviderError;
  throw StorageError("unknown outcome status: " + s);
}

inline json to_json(const TriageDecision& d) {
  json j;
  j["client_verdict"] = verdict_name(d.client_verdict);
  j["server_verdict"] = d.server_verdict ? json(verdict_name(*d.server_verdict)) : json(nullptr);
  j["outcome"] = d.outcome == TriageOutcome::Bypass ? "bypass" : "council";
  j["direct_answer"] = d.direct_answer ? json(*d.direct_answer) : json(nullptr);
  j["degraded"] = d.degraded;
  return j;
}
inline TriageDecision triage_from(const json& j) {
  TriageDecision d;
  d.client_verdict = verdict_from(j.at("client_verdict").get<std::string>());
  if (!j.at("server_verdict").is_null())
    d.server_verdict = verdict_from(j.at("server_verdict").get<std::string>());
  d.outcome = j.at("outcome").get<std::string>() == "bypass" ? TriageOutcome::Bypass
                                                             : TriageOutcome::Council;
  if (!j.at("direct_answer").is_null()) d.direct_answer = j.at("direct_answer").get<std::string>();
  d.degraded = j.at("degraded").get<bool>();
  return d;
}

inline json to_json(const ExpertOutcome& o) {
  json j;
  j["expert_id"] = o.expert_id;
  j["status"] = status_name(o.status);
  j["response_text"] = o.response ? json(o.response->text) : json(nullptr);
  j["latency_seconds"] = o.latency_seconds;
  j["error_message"] = o.error_message;
  return j;
}
inline ExpertOutcome outcome_from(const json& j) {
  ExpertOutcome o;
  o.expert_id = j.at("expert_id").get<std::string>();
  o.status = status_from(j.at("status").get<std::string>());
  if (!j.at("response_text").is_null())
    o.response = ExpertResponse{o.expert_id, j.at("response_text").get<std::string>()};
  o.latency_seconds = j.at("latency_seconds").get<double>();
  o.error_message = j.at("error_message").get<std::string>();
  return o;
}

inline json to_json(const Claim& c) {
  json j;
  j["claim_id"] = c.claim_id;
  j["statement"] = c.statement;
  j["source_expert"] = c.source_expert;
  j["span"] = c.span ? json({{"begin", c.span->first}, {"end", c.span->second}}) : json(nullptr);
  return j;
}
inline Claim claim_from(const json& j) {
  Claim c;
  c.claim_id = j.at("claim_id").get<std::string>();
  c.statement = j.at("statement").get<std::string>();
  c.source_expert = j.at("source_expert").get<std::string>();
  if (!j.at("span").is_null())
    c.span = {j.at("span").at("begin").get<std::size_t>(),
              j.at("span").at("end").get<std::size_t>()};
  return c;
}

inline json to_json(const ClaimSupport& s) {
  json j;
  j["canonical_claim"] = to_json(s.canonical_claim);
  j["supporters"] = s.supporters;  // std::set serializes sorted
  j["support_count"] = s.support_count;
  return j;
}
inline ClaimSupport support_from(const json& j) {
  ClaimSupport s;
  s.canonical_claim = claim_from(j.at("canonical_claim"));
  for (const auto& id : j.at("supporters")) s.supporters.insert(id.get<std::string>());
  s.support_count = j.at("support_count").get<int>();
  return s;
}

inline json to_json(const ClaimPartition& p) {
  json j;
  auto bucket = [](const std::vector<ClaimSupport>& v) {
    json arr = json::array();
    for (const auto& s : v) arr.push_back(to_json(s));
    return arr;
  };
  j["consensus"] = bucket(p.consensus);
  j["partial"] = bucket(p.partial);
  j["unique"] = bucket(p.unique);
  j["n_experts"] = p.n_experts;
  return j;
}
inline ClaimPartition partition_from(const json& j) {
  ClaimPartition p;
  for (const auto& s : j.at("consensus")) p.consensus.push_back(support_from(s));
  for (const auto& s : j.at("partial")) p.partial.push_back(support_from(s));
  for (const auto& s : j.at("unique")) p.unique.push_back(support_from(s));
  p.n_experts = j.at("n_experts").get<int>();
  return p;
}

inline json to_json(const ContradictionPair& c) {
  return json{{"claim_a", to_json(c.claim_a)}, {"claim_b", to_json(c.claim_b)}};
}
inline ContradictionPair contradiction_from(const json& j) {
  return ContradictionPair{claim_from(j.at("claim_a")), claim_from(j.at("claim_b"))};
}

inline json to_json(const SynthesisReport& r) {
  json j;
  j["consensus_section"] = r.consensus_section;
  j["partial_section"] = r.partial_section;
  j["disagreement_section"] = r.disagreement_section;
  j["unique_section"] = r.unique_section;
  j["analysis_section"] = r.analysis_section;
  j["degraded_structure"] = r.degraded_structure;
  return j;
}
inline SynthesisReport report_from(const json& j) {
  SynthesisReport r;
  r.consensus_section = j.at("consensus_section").get<std::string>();
  r.partial_section = j.at("partial_section").get<std::string>();
  r.disagreement_section = j.at("disagreement_section").get<std::string>();
  r.unique_section = j.at("unique_section").get<std::string>();
  r.analysis_section = j.at("analysis_section").get<std::string>();
  r.degraded_structure = j.at("degraded_structure").get<bool>();
  return r;
}

inline json to_json(const LatencyBreakdown& l) {
  json experts = json::object();
  for (const auto& [id, seconds] : l.expert_latencies) experts[id] = seconds;
  return json{{"expert_latencies", experts},
              {"synthesis_latency", l.synthesis_latency},
              {"total", l.total}};
}
inline LatencyBreakdown latency_from(const json& j) {
  LatencyBreakdown l;
  for (const auto& [id, seconds] : j.at("expert_latencies").items())
    l.expert_latencies.emplace_back(id, seconds.get<double>());
  l.synthesis_latency = j.at("synthesis_latency").get<double>();
  l.total = j.at("total").get<double>();
  return l;
}

}  // namespace transcript_json

/// A persisted council run: everything needed to replay the deterministic
/// phase-3 computations.
struct Transcript {
  int schema_version = kTranscriptSchemaVersion;
  std::string query;
  TriageDecision triage;
  bool bypassed = false;
  std::optional<std::string> direct_answer;
  std::vector<ExpertOutcome> outcomes;
  /// Flat support map (pre-partition) from which buckets are re-derivable.
  std::vector<ClaimSupport> claim_supports;
  ClaimPartition partition;
  std::vector<ContradictionPair> contradictions;
  SynthesisReport report;
  LatencyBreakdown latency;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::uint64_t seed = 0;
};

inline Transcript make_transcript(const CouncilResult& result,
                                  nlohmann::json config_snapshot = nlohmann::json::object()) {
  Transcript t;
  t.query = result.query;
  t.triage = result.triage;
  t.bypassed = result.bypassed;
  t.direct_answer = result.direct_answer;
  t.outcomes = result.outcomes;
  for (const auto& bucket : {&result.partition.consensus, &result.partition.partial,
                             &result.partition.unique})
    t.claim_supports.insert(t.claim_supports.end(), bucket->begin(), bucket->end());
  t.partition = result.partition;
  t.contradictions = result.contradictions;
  t.report = result.report;
  t.latency = result.latency;
  t.config_snapshot = std::move(config_snapshot);
  t.seed = result.seed;
  return t;
}

inline std::string serialize_transcript(const Transcript& t) {
  using transcript_json::to_json;
  nlohmann::json j;
  j["schema_version"] = t.schema_version;
  j["query"] = t.query;
  j["triage"] = to_json(t.triage);
  j["bypassed"] = t.bypassed;
  j["direct_answer"] = t.direct_answer ? nlohmann::json(*t.direct_answer) : nlohmann::json(nullptr);
  nlohmann::json outcomes = nlohmann::json::array();
  for (const auto& o : t.outcomes) outcomes.push_back(to_json(o));
  j["outcomes"] = outcomes;
  nlohmann::json supports = nlohmann::json::array();
  for (const auto& s : t.claim_supports) supports.push_back(to_json(s));
  j["claim_supports"] = supports;
  j["partition"] = to_json(t.partition);
  nlohmann::json contradictions = nlohmann::json::array();
  for (const auto& c : t.contradictions) contradictions.push_back(to_json(c));
  j["contradictions"] = contradictions;
  j["report"] = to_json(t.report);
  j["latency"] = to_json(t.latency);
  j["config_snapshot"] = t.config_snapshot;
  j["seed"] = t.seed;
  return j.dump(2) + "\n";
}

inline Transcript parse_transcript(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw StorageError("transcript parse error at byte " + std::to_string(e.byte) + ": " +
                       e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kTranscriptSchemaVersion)
      throw StorageError("unsupported transcript schema_version " + std::to_string(version));
    Transcript t;
    t.schema_version = version;
    t.query = j.at("query").get<std::string>();
    t.triage = transcript_json::triage_from(j.at("triage"));
    t.bypassed = j.at("bypassed").get<bool>();
    if (!j.at("direct_answer").is_null()) t.direct_answer = j.at("direct_answer").get<std::string>();
    for (const auto& o : j.at("outcomes")) t.outcomes.push_back(transcript_json::outcome_from(o));
    for (const auto& s : j.at("claim_supports"))
      t.claim_supports.push_back(transcript_json::support_from(s));
    t.partition = transcript_json::partition_from(j.at("partition"));
    for (const auto& c : j.at("contradictions"))
      t.contradictions.push_back(transcript_json::contradiction_from(c));
    t.report = transcript_json::report_from(j.at("report"));
    t.latency = transcript_json::latency_from(j.at("latency"));
    t.config_snapshot = j.at("config_snapshot");
    t.seed = j.at("seed").get<std::uint64_t>();
    return t;
  } catch (const StorageError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw StorageError(std::string("malformed transcript: ") + e.what());
  }
}

/// Write the transcript with fsync-before-ack durability.
inline void persist_transcript(const Transcript& t, const std::filesystem::path& path) {
  const std::string body = serialize_transcript(t);
  std::FILE* file = std::fopen(path.string().c_str(), "wb");
  if (!file) throw StorageError("cannot open transcript path for writing: " + path.string());
  const std::size_t written = std::fwrite(body.data(), 1, body.size(), file);
  const bool flushed = std::fflush(file) == 0;
#ifndef _WIN32
  const bool synced = ::fsync(::fileno(file)) == 0;
#else
  const bool synced = true;
#endif
  std::fclose(file);
  if (written != body.size() || !flushed || !synced)
    throw StorageError("failed to durably write transcript: " + path.string());
}

inline Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open transcript: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_transcript(buf.str());
}

struct ReplayReport {
  std::vector<std::string> mismatches;
  bool clean() const { return mismatches.empty(); }
};

/// Recompute the deterministic phase-3 outputs from the stored raw support
/// map and verify them against the stored partition; verify internal
/// consistency of counts and the latency contract.
inline ReplayReport replay_transcript(const Transcript& t) {
  ReplayReport report;
  if (t.bypassed) {
    if (!t.partition.consensus.empty() || !t.partition.partial.empty() ||
        !t.partition.unique.empty())
      report.mismatches.push_back("bypassed run carries a non-empty claim partition");
    return report;
  }

  for (const auto& support : t.claim_supports) {
    if (support.support_count != static_cast<int>(support.supporters.size()))
      report.mismatches.push_back("claim '" + support.canonical_claim.statement +
                                  "': support_count " + std::to_string(support.support_count) +
                                  " != |supporters| " +
                                  std::to_string(support.supporters.size()));
  }

  ClaimPartition recomputed;
  try {
    std::vector<ClaimSupport> normalized = t.claim_supports;
    for (auto& s : normalized) s.support_count = static_cast<int>(s.supporters.size());
    recomputed = partition_claims(normalized, t.partition.n_experts);
  } catch (const CouncilError& e) {
    report.mismatches.push_back(std::string("partition recomputation failed: ") + e.what());
    return report;
  }

  auto bucket_ids = [](const std::vector<ClaimSupport>& bucket) {
    std::vector<std::string> ids;
    for (const auto& s : bucket) ids.push_back(s.canonical_claim.claim_id);
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  auto compare_bucket = [&](const char* name, const std::vector<ClaimSupport>& stored,
                            const std::vector<ClaimSupport>& fresh) {
    if (bucket_ids(stored) != bucket_ids(fresh))
      report.mismatches.push_back(std::string("partition.") + name +
                                  " differs from recomputation over stored claim supports");
  };
  compare_bucket("consensus", t.partition.consensus, recomputed.consensus);
  compare_bucket("partial", t.partition.partial, recomputed.partial);
  compare_bucket("unique", t.partition.unique, recomputed.unique);

  for (const auto& pair : t.contradictions) {
    if (pair.claim_a.source_expert == pair.claim_b.source_expert)
      report.mismatches.push_back("contradiction pair " + pair.claim_a.claim_id + "/" +
                                  pair.claim_b.claim_id + " is not cross-expert");
  }

  double max_expert = 0.0;
  for (const auto& [id, seconds] : t.latency.expert_latencies)
    max_expert = std::max(max_expert, seconds);
  if (t.latency.total + 1e-9 < max_expert)
    report.mismatches.push_back("latency.total below the slowest expert latency");
  if (t.latency.total + 1e-9 < t.latency.synthesis_latency)
    report.mismatches.push_back("latency.total below the synthesis latency");
  return report;
}

inline ReplayReport replay_transcript(const std::filesystem::path& path) {
  return replay_transcript(load_transcript(path));
}

}  // namespace council
