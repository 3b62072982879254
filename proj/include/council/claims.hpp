#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "council/agent.hpp"
#include "council/errors.hpp"
#include "council/text.hpp"

namespace council {

struct Claim {
  std::string claim_id;
  std::string statement;                                // normalized text
  std::string source_expert;
  std::optional<std::pair<std::size_t, std::size_t>> span;  // [begin, end) in source response
};

struct ClaimSupport {
  Claim canonical_claim;
  std::set<std::string> supporters;
  int support_count = 0;
};

struct ClaimPartition {
  std::vector<ClaimSupport> consensus;  // supported by all N experts
  std::vector<ClaimSupport> partial;    // 1 < count < N
  std::vector<ClaimSupport> unique;     // exactly one expert
  int n_experts = 0;
};

struct ContradictionPair {
  Claim claim_a;
  Claim claim_b;
};

// ---------------------------------------------------------------------------
// Pluggable strategy interfaces
// ---------------------------------------------------------------------------

class ClaimExtractor {
 public:
  virtual ~ClaimExtractor() = default;
  virtual std::vector<Claim> extract(const ExpertResponse& response) = 0;
};

class ClaimMatcher {
 public:
  virtual ~ClaimMatcher() = default;
  virtual bool equivalent(const Claim& a, const Claim& b) = 0;
};

class ContradictionDetector {
 public:
  virtual ~ContradictionDetector() = default;
  virtual bool contradicts(const Claim& a, const Claim& b) = 0;
};

/// Reference extractor: declarative-sentence segmentation. Questions are
/// not factual claims and are dropped.
class SentenceClaimExtractor final : public ClaimExtractor {
 public:
  std::vector<Claim> extract(const ExpertResponse& response) override {
    std::vector<Claim> claims;
    std::size_t cursor = 0;
    int index = 0;
    for (const auto& sentence : text::split_sentences(response.text)) {
      const std::size_t pos = response.text.find(sentence, cursor);
      if (sentence.back() == '?') continue;
      Claim claim;
      claim.claim_id = response.expert_id + "#" + std::to_string(index++);
      claim.statement = text::trim(sentence);
      claim.source_expert = response.expert_id;
      if (pos != std::string::npos) {
        claim.span = {pos, pos + sentence.size()};
        cursor = pos + sentence.size();
      }
      claims.push_back(std::move(claim));
    }
    return claims;
  }
};

/// Extractor backed by an agent call: the agent must return one claim per
/// line. Failures surface as AgentError carrying the expert id.
class AgentClaimExtractor final : public ClaimExtractor {
 public:
  explicit AgentClaimExtractor(AgentPtr agent) : agent_(std::move(agent)) {}

  std::vector<Claim> extract(const ExpertResponse& response) override {
    std::string raw;
    try {
      raw = agent_->complete(AgentRequest{response.text, {}, nullptr, nullptr});
    } catch (const std::exception& e) {
      throw AgentError(response.expert_id, std::string("claim extraction failed: ") + e.what());
    }
    std::vector<Claim> claims;
    std::size_t start = 0;
    int index = 0;
    while (start <= raw.size()) {
      const std::size_t end = raw.find('\n', start);
      const std::string line =
          text::trim(raw.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (!line.empty()) {
        claims.push_back(Claim{response.expert_id + "#" + std::to_string(index++), line,
                               response.expert_id, std::nullopt});
      }
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return claims;
  }

 private:
  AgentPtr agent_;
};

/// Reference matcher: case/whitespace/punctuation-normalized exact match.
class NormalizedTextMatcher final : public ClaimMatcher {
 public:
  bool equivalent(const Claim& a, const Claim& b) override {
    return text::normalize_claim_key(a.statement) == text::normalize_claim_key(b.statement);
  }
};

/// Matcher driven by an explicit equivalence table (test fixtures).
/// Statements are compared by normalized key; listed pairs are equivalent
/// in addition to exact matches.
class ScriptedMatcher final : public ClaimMatcher {
 public:
  explicit ScriptedMatcher(std::vector<std::pair<std::string, std::string>> equivalent_pairs) {
    for (auto& [a, b] : equivalent_pairs) {
      pairs_.insert(canonical_pair(a, b));
    }
  }

  bool equivalent(const Claim& a, const Claim& b) override {
    const std::string ka = text::normalize_claim_key(a.statement);
    const std::string kb = text::normalize_claim_key(b.statement);
    if (ka == kb) return true;
    return pairs_.count(canonical_pair(ka, kb)) > 0;
  }

 private:
  static std::pair<std::string, std::string> canonical_pair(std::string_view a, std::string_view b) {
    std::string ka = text::normalize_claim_key(a);
    std::string kb = text::normalize_claim_key(b);
    return ka <= kb ? std::make_pair(ka, kb) : std::make_pair(kb, ka);
  }
  std::set<std::pair<std::string, std::string>> pairs_;
};

/// Detector driven by a scripted contradiction table; the default when no
/// NLI-style detector is plugged in.
class ScriptedDetector final : public ContradictionDetector {
 public:
  ScriptedDetector() = default;
  explicit ScriptedDetector(std::vector<std::pair<std::string, std::string>> contradictory_pairs) {
    for (auto& [a, b] : contradictory_pairs) {
      std::string ka = text::normalize_claim_key(a);
      std::string kb = text::normalize_claim_key(b);
      pairs_.insert(ka <= kb ? std::make_pair(ka, kb) : std::make_pair(kb, ka));
    }
  }

  bool contradicts(const Claim& a, const Claim& b) override {
    std::string ka = text::normalize_claim_key(a.statement);
    std::string kb = text::normalize_claim_key(b.statement);
    if (ka > kb) std::swap(ka, kb);
    return pairs_.count({ka, kb}) > 0;
  }

 private:
  std::set<std::pair<std::string, std::string>> pairs_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline std::vector<Claim> extract_claims(const ExpertResponse& response,
                                         ClaimExtractor& extractor) {
  return extractor.extract(response);
}

/// Merge equivalent claims across experts into ClaimSupport entries.
/// Merging is the transitive closure of matcher equivalence (union-find);
/// the canonical statement is the first-seen variant, and an expert
/// supports a canonical claim at most once.
inline std::vector<ClaimSupport> build_support_map(
    const std::vector<std::pair<std::string, std::vector<Claim>>>& claim_sets,
    ClaimMatcher& matcher) {
  {
    std::set<std::string> ids;
    for (const auto& [expert_id, claims] : claim_sets) {
      if (!ids.insert(expert_id).second)
        throw InvalidInputError("duplicate expert id in support map input: " + expert_id);
      (void)claims;
    }
  }

  std::vector<Claim> all;
  for (const auto& [expert_id, claims] : claim_sets) {
    for (const auto& claim : claims) all.push_back(claim);
  }

  std::vector<std::size_t> parent(all.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (matcher.equivalent(all[i], all[j])) {
        const std::size_t ri = find(i), rj = find(j);
        // Keep the smaller (first-seen) index as the root.
        if (ri < rj)
          parent[rj] = ri;
        else if (rj < ri)
          parent[ri] = rj;
      }
    }
  }

  std::map<std::size_t, ClaimSupport> groups;  // root index -> support, first-seen order
  for (std::size_t i = 0; i < all.size(); ++i) {
    const std::size_t root = find(i);
    auto [it, inserted] = groups.try_emplace(root);
    if (inserted) it->second.canonical_claim = all[root];
    it->second.supporters.insert(all[i].source_expert);
  }

  std::vector<ClaimSupport> supports;
  supports.reserve(groups.size());
  for (auto& [root, support] : groups) {
    support.support_count = static_cast<int>(support.supporters.size());
    supports.push_back(std::move(support));
  }
  return supports;
}

/// Bucket by support count: N -> consensus, strictly between -> partial,
/// 1 -> unique. A pure function of (support_count, n_experts).
inline ClaimPartition partition_claims(const std::vector<ClaimSupport>& supports, int n_experts) {
  if (n_experts < 2) throw InvalidInputError("partition requires n_experts >= 2");
  ClaimPartition partition;
  partition.n_experts = n_experts;
  for (const auto& support : supports) {
    if (support.support_count < 1 || support.support_count > n_experts) {
      throw InvalidInputError("support count " + std::to_string(support.support_count) +
                              " outside [1, " + std::to_string(n_experts) + "] for claim '" +
                              support.canonical_claim.statement + "'");
    }
    if (support.support_count == n_experts)
      partition.consensus.push_back(support);
    else if (support.support_count == 1)
      partition.unique.push_back(support);
    else
      partition.partial.push_back(support);
  }
  return partition;
}

/// Cross-expert contradictory pairs, symmetric closure deduplicated by
/// keeping one canonical orientation per pair.
inline std::vector<ContradictionPair> detect_contradictions(const std::vector<Claim>& all_claims,
                                                            ContradictionDetector& detector) {
  std::vector<ContradictionPair> pairs;
  std::set<std::pair<std::string, std::string>> seen;  // claim_id pair, canonical order
  for (std::size_t i = 0; i < all_claims.size(); ++i) {
    for (std::size_t j = i + 1; j < all_claims.size(); ++j) {
      const Claim& a = all_claims[i];
      const Claim& b = all_claims[j];
      if (a.source_expert == b.source_expert) continue;
      if (!detector.contradicts(a, b)) continue;
      auto key = a.claim_id <= b.claim_id ? std::make_pair(a.claim_id, b.claim_id)
                                          : std::make_pair(b.claim_id, a.claim_id);
      if (!seen.insert(std::move(key)).second) continue;
      pairs.push_back(ContradictionPair{a, b});
    }
  }
  return pairs;
}

}  // namespace council
