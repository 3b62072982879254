#include <doctest.h>

#include <map>
#include <random>
#include <string>
#include <vector>

#include "council/mock.hpp"
#include "council/stats.hpp"
#include "council/triage.hpp"

using namespace council;

namespace {

class FixedReplyClassifier final : public ExpertAgent {
 public:
  explicit FixedReplyClassifier(std::string reply, bool fail = false)
      : reply_(std::move(reply)), fail_(fail) {}
  std::string id() const override { return "fixed-classifier"; }
  std::string complete(const AgentRequest&) override {
    ++calls;
    if (fail_) throw AgentError(id(), "classifier down");
    return reply_;
  }
  int calls = 0;

 private:
  std::string reply_;
  bool fail_;
};

}  // namespace

TEST_CASE("client stage boundary cases at 18 chars / 4 tokens") {
  TriageConfig cfg;
  const std::string boundary = "is water wet now??";
  REQUIRE(boundary.size() == 18);
  REQUIRE(text::token_count(boundary) == 4);
  CHECK(classify_client(boundary, cfg) == Verdict::Trivial);

  CHECK(classify_client("is water wet now???", cfg) == Verdict::Nontrivial);  // 19 chars
  CHECK(classify_client("is water wet or dry", cfg) == Verdict::Nontrivial);  // 5 tokens, 19 chars
  CHECK(classify_client("is water wet or no", cfg) == Verdict::Nontrivial);   // 18 chars, 5 tokens
  CHECK(classify_client("a b c d", cfg) == Verdict::Trivial);
  CHECK(classify_client("a b c d e", cfg) == Verdict::Nontrivial);
}

TEST_CASE("greeting patterns bypass the length gate") {
  TriageConfig cfg;
  CHECK(classify_client("Hello", cfg) == Verdict::Trivial);
  CHECK(classify_client("  THANK YOU  ", cfg) == Verdict::Trivial);
  CHECK(classify_client("good    morning", cfg) == Verdict::Trivial);
  // Long greeting still trivial via pattern match even past thresholds.
  TriageConfig tight = cfg;
  tight.max_chars = 2;
  tight.max_tokens = 1;
  CHECK(classify_client("good morning", tight) == Verdict::Trivial);
}

TEST_CASE("empty query is rejected") {
  TriageConfig cfg;
  CHECK_THROWS_AS(classify_client("   ", cfg), InvalidInputError);
}

TEST_CASE("server reply parsing") {
  auto [v1, a1] = parse_server_reply("TRIVIAL: Hi there!");
  CHECK(v1 == Verdict::Trivial);
  REQUIRE(a1.has_value());
  CHECK(*a1 == "Hi there!");

  auto [v2, a2] = parse_server_reply("TRIVIAL");
  CHECK(v2 == Verdict::Trivial);
  CHECK_FALSE(a2.has_value());

  auto [v3, a3] = parse_server_reply("  nontrivial  ");
  CHECK(v3 == Verdict::Nontrivial);
  CHECK_FALSE(a3.has_value());

  CHECK_THROWS_AS(parse_server_reply("MAYBE"), AgentError);
}

TEST_CASE("bypass requires both stages trivial") {
  TriageConfig cfg;
  FixedReplyClassifier trivial_server("TRIVIAL: Hello!");
  const TriageDecision d = triage_query("hi", Session{}, cfg, trivial_server);
  CHECK(d.outcome == TriageOutcome::Bypass);
  REQUIRE(d.direct_answer.has_value());
  CHECK(*d.direct_answer == "Hello!");

  FixedReplyClassifier nontrivial_server("NONTRIVIAL");
  const TriageDecision d2 = triage_query("hi", Session{}, cfg, nontrivial_server);
  CHECK(d2.outcome == TriageOutcome::Council);
  CHECK_FALSE(d2.degraded);
}

TEST_CASE("short circuit skips the server for client-nontrivial queries") {
  TriageConfig cfg;
  FixedReplyClassifier server("TRIVIAL");
  const TriageDecision d =
      triage_query("please explain the entire history of rome", Session{}, cfg, server);
  CHECK(d.outcome == TriageOutcome::Council);
  CHECK(server.calls == 0);

  TriageConfig no_short = cfg;
  no_short.short_circuit = false;
  FixedReplyClassifier server2("TRIVIAL");
  const TriageDecision d2 =
      triage_query("please explain the entire history of rome", Session{}, no_short, server2);
  CHECK(d2.outcome == TriageOutcome::Council);  // still needs both trivial
  CHECK(server2.calls == 1);
}

TEST_CASE("server failure fails safe to council") {
  TriageConfig cfg;
  FixedReplyClassifier broken("", true);
  const TriageDecision d = triage_query("hi", Session{}, cfg, broken);
  CHECK(d.outcome == TriageOutcome::Council);
  CHECK(d.degraded);
  CHECK_FALSE(d.server_verdict.has_value());
}

TEST_CASE("evaluate_triage matches an independent recount on 2000 synthetic items") {
  TriageConfig cfg;
  HeuristicClassifierAgent classifier(cfg);

  std::mt19937_64 rng(20260823);
  std::vector<LabeledQuery> labeled;
  const std::vector<std::string> short_queries = {"hi",      "ok",   "why me", "what now",
                                                  "is it on", "a b c", "help",  "bye"};
  const std::vector<std::string> long_queries = {
      "explain the difference between tcp and udp in detail",
      "what is the capital of australia and why is it not sydney",
      "summarize the plot of war and peace in three paragraphs",
      "how do i configure a reverse proxy with tls termination"};
  for (int i = 0; i < 2000; ++i) {
    LabeledQuery item;
    if (stats::uniform_double(rng) < 0.4) {
      item.query = short_queries[stats::uniform_index(rng, short_queries.size())];
      // Gold labels deliberately disagree with the classifier sometimes.
      item.gold = stats::uniform_double(rng) < 0.9 ? Verdict::Trivial : Verdict::Nontrivial;
    } else {
      item.query = long_queries[stats::uniform_index(rng, long_queries.size())];
      item.gold = stats::uniform_double(rng) < 0.95 ? Verdict::Nontrivial : Verdict::Trivial;
    }
    labeled.push_back(std::move(item));
  }

  const TriageMetrics m = evaluate_triage(labeled, cfg, classifier);

  // Independent recount using only classify_client + the known mock server
  // behavior (the mock never overturns a client-trivial verdict).
  std::size_t correct = 0, false_bypass = 0, trivial = 0;
  for (const auto& item : labeled) {
    const bool bypass = classify_client(item.query, cfg) == Verdict::Trivial;
    if (bypass) ++trivial;
    if (bypass && item.gold == Verdict::Nontrivial) ++false_bypass;
    if ((bypass && item.gold == Verdict::Trivial) ||
        (!bypass && item.gold == Verdict::Nontrivial))
      ++correct;
  }
  const double n = 2000.0;
  CHECK(m.accuracy == doctest::Approx(correct / n).epsilon(1e-12));
  CHECK(m.false_bypass_rate == doctest::Approx(false_bypass / n).epsilon(1e-12));
  CHECK(m.trivial_fraction == doctest::Approx(trivial / n).epsilon(1e-12));
  CHECK(m.trivial_fraction + m.nontrivial_fraction == doctest::Approx(1.0));
}
