#include <doctest.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "council/config.hpp"
#include "council/council.hpp"

using namespace council;

namespace {

AgentPtr scripted(const std::string& id, const std::string& query_key, const std::string& answer,
                  double latency = 0.0) {
  std::map<std::string, ScriptEntry> script;
  script[text::normalize(query_key)] = ScriptEntry{answer, latency, false};
  return std::make_shared<ScriptedExpert>(id, std::move(script));
}

}  // namespace

TEST_CASE("mock council end to end: partition buckets and structured report") {
  const FileConfig cfg = preset_config("council-noweb");
  const CouncilSetup setup = make_mock_setup(cfg);
  const CouncilResult result = run_council("compare tcp and udp", Session{}, setup);

  CHECK_FALSE(result.bypassed);
  REQUIRE(result.responses.size() == 3);
  // Mock experts emit one consensus claim, one N-1 claim, one unique each.
  CHECK(result.partition.n_experts == 3);
  CHECK(result.partition.consensus.size() == 1);
  CHECK(result.partition.partial.size() == 1);
  CHECK(result.partition.partial[0].support_count == 2);
  CHECK(result.partition.unique.size() == 3);

  CHECK_FALSE(result.report.degraded_structure);
  CHECK(result.report.consensus_section.find("core answer") != std::string::npos);
  CHECK(result.report.partial_section.find("secondary aspect") != std::string::npos);
  CHECK(result.report.disagreement_section == "None.");
  CHECK(result.report.unique_section.find("unique observation") != std::string::npos);
  CHECK_FALSE(result.report.analysis_section.empty());
  CHECK(result.latency.expert_latencies.size() == 3);
  CHECK(result.latency.total >= result.latency.synthesis_latency);
}

TEST_CASE("council result is deterministic across runs") {
  const CouncilSetup setup = make_mock_setup(preset_config("council-noweb"));
  const CouncilResult a = run_council("what is entropy", Session{}, setup);
  const CouncilResult b = run_council("what is entropy", Session{}, setup);
  CHECK(a.synthesis_prompt == b.synthesis_prompt);
  CHECK(a.report.consensus_section == b.report.consensus_section);
  CHECK(a.report.analysis_section == b.report.analysis_section);
}

TEST_CASE("trivial query bypasses the council") {
  const CouncilSetup setup = make_mock_setup(preset_config("council-noweb"));
  const CouncilResult result = run_council("hello", Session{}, setup);
  CHECK(result.bypassed);
  REQUIRE(result.direct_answer.has_value());
  CHECK(result.outcomes.empty());
  CHECK(result.partition.consensus.empty());
  CHECK(result.triage.outcome == TriageOutcome::Bypass);
}

TEST_CASE("triage disabled forces the full council") {
  CouncilSetup setup = make_mock_setup(preset_config("council-noweb"));
  setup.triage_enabled = false;
  const CouncilResult result = run_council("hello", Session{}, setup);
  CHECK_FALSE(result.bypassed);
  CHECK(result.responses.size() == 3);
}

TEST_CASE("quorum failure propagates with the failing experts") {
  CouncilSetup setup = make_mock_setup(preset_config("council-noweb"));
  std::map<std::string, ScriptEntry> failing;
  failing[text::normalize("explain dns resolution end to end")] = ScriptEntry{"", 0.0, true};
  setup.experts = {std::make_shared<ScriptedExpert>("a", failing),
                   std::make_shared<ScriptedExpert>("b", failing),
                   scripted("c", "explain dns resolution end to end", "DNS maps names to addresses.")};
  CHECK_THROWS_AS(run_council("explain dns resolution end to end", Session{}, setup), QuorumError);
}

TEST_CASE("one failed expert degrades to an effective N of 2") {
  CouncilSetup setup = make_mock_setup(preset_config("council-noweb"));
  std::map<std::string, ScriptEntry> failing;
  failing[text::normalize("explain dns resolution end to end")] = ScriptEntry{"", 0.0, true};
  setup.experts = {scripted("a", "explain dns resolution end to end", "DNS maps names to addresses."),
                   std::make_shared<ScriptedExpert>("b", failing),
                   scripted("c", "explain dns resolution end to end", "DNS maps names to addresses.")};
  const CouncilResult result = run_council("explain dns resolution end to end", Session{}, setup);
  CHECK(result.responses.size() == 2);
  CHECK(result.partition.n_experts == 2);
  CHECK(result.partition.consensus.size() == 1);  // both survivors agree
  CHECK(result.partition.partial.empty());
}

TEST_CASE("N=2 councils never produce a partial bucket") {
  FileConfig cfg = with_expert_count(preset_config("council-noweb"), 2);
  const CouncilSetup setup = make_mock_setup(cfg);
  const CouncilResult result = run_council("compare http versions", Session{}, setup);
  CHECK(result.partition.n_experts == 2);
  CHECK(result.partition.partial.empty());
  CHECK(result.partition.consensus.size() >= 1);
}

TEST_CASE("N=4 ablation preset runs end to end") {
  FileConfig cfg = with_expert_count(preset_config("council-noweb"), 4);
  REQUIRE(cfg.experts.size() == 4);
  const CouncilResult result = run_council("compare http versions", Session{},
                                           make_mock_setup(cfg));
  CHECK(result.partition.n_experts == 4);
  CHECK(result.partition.consensus.size() == 1);
  CHECK(result.partition.partial.size() == 1);
  CHECK(result.partition.partial[0].support_count == 3);
  CHECK(result.partition.unique.size() == 4);
}

TEST_CASE("majority vote mode bypasses structured synthesis") {
  CouncilSetup setup = make_mock_setup(preset_config("council-noweb"));
  setup.synthesis_mode = SynthesisMode::MajorityVote;
  setup.experts = {scripted("a", "pick one of the listed answers", "Answer A."), scripted("b", "pick one of the listed answers", "Answer B."),
                   scripted("c", "pick one of the listed answers", "Answer B.")};
  const CouncilResult result = run_council("pick one of the listed answers", Session{}, setup);
  CHECK(result.report.analysis_section == "Answer B.");
  CHECK(result.report.consensus_section.empty());
  CHECK(result.synthesis_prompt.empty());
}

TEST_CASE("setup validation") {
  CouncilSetup setup = make_mock_setup(preset_config("council-noweb"));
  setup.experts.clear();
  CHECK_THROWS_AS(run_council("q", Session{}, setup), InvalidInputError);
  setup = make_mock_setup(preset_config("council-noweb"));
  setup.min_success = 1;
  CHECK_THROWS_AS(run_council("q", Session{}, setup), InvalidInputError);
  setup = make_mock_setup(preset_config("council-noweb"));
  setup.server_classifier = nullptr;
  CHECK_THROWS_AS(run_council("q", Session{}, setup), InvalidInputError);
}

TEST_CASE("config round trip and presets") {
  const FileConfig cfg = preset_config("council-web");
  CHECK(cfg.experts.size() == 3);
  CHECK(cfg.experts[0].spec.web_enabled);
  const FileConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.preset == cfg.preset);
  CHECK(back.experts.size() == cfg.experts.size());
  CHECK(back.experts[2].spec.model_id == cfg.experts[2].spec.model_id);
  CHECK(back.synthesizer.spec.generation.max_new_tokens == 8192);
  CHECK(back.triage.max_chars == 18);

  CHECK(preset_config("single-noweb").experts.size() == 1);
  CHECK(preset_config("rag-baseline").unimplemented);
  CHECK_THROWS_AS(make_mock_setup(preset_config("rag-baseline")), InvalidInputError);
  CHECK_THROWS_AS(preset_config("nonsense"), InvalidInputError);
  CHECK_THROWS_AS(with_expert_count(preset_config("council-noweb"), 5), InvalidInputError);
}

TEST_CASE("history truncation drops oldest turns first") {
  Session history;
  history.turns = {{"user", "one two three"}, {"assistant", "four five"}, {"user", "six"}};
  const Session kept = truncate_history(history, 3);
  REQUIRE(kept.turns.size() == 2);
  CHECK(kept.turns[0].content == "four five");
  CHECK(truncate_history(history, 100).turns.size() == 3);
  CHECK_THROWS_AS(truncate_history(history, 0), InvalidInputError);
}
