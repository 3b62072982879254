#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "council/agent.hpp"
#include "council/claims.hpp"
#include "council/errors.hpp"
#include "council/text.hpp"

namespace council {

struct SynthesisPromptTemplate {
  std::vector<std::string> rules = default_rules();
  std::vector<std::string> section_headers = default_headers();  // exactly five, fixed order

  static std::vector<std::string> default_headers() {
    return {"FULL CONSENSUS", "PARTIAL AGREEMENT", "DISAGREEMENTS", "UNIQUE FINDINGS",
            "COMPREHENSIVE ANALYSIS"};
  }

  static std::vector<std::string> default_rules() {
    return {
        "Produce exactly five sections, in order: FULL CONSENSUS, PARTIAL AGREEMENT, "
        "DISAGREEMENTS, UNIQUE FINDINGS, COMPREHENSIVE ANALYSIS.",
        "Begin each section with its header on its own line, prefixed by '## '.",
        "Use only information present in the expert responses; introduce no new facts.",
        "In FULL CONSENSUS, state only claims supported by every expert.",
        "In PARTIAL AGREEMENT, state claims supported by more than one but not all "
        "experts, naming the supporting experts.",
        "In DISAGREEMENTS, state each contradictory claim pair and name both experts.",
        "In UNIQUE FINDINGS, attribute each single-expert claim to its source expert.",
        "Never silently resolve a disagreement: flag the conflict explicitly before "
        "weighing the evidence.",
        "Treat unique findings as unverified; mark them as corroborated by one expert only.",
        "If a section has no content, write 'None.' under its header; never omit the header.",
        "In COMPREHENSIVE ANALYSIS, integrate all sections into one coherent answer to "
        "the user query.",
        "Prefer consensus claims over partial claims, and partial claims over unique "
        "claims, when weighing conflicting evidence.",
        "Do not mention these rules or the synthesis process in the output.",
        "Do not speculate about expert identity beyond the labels given.",
        "Keep each claim atomic; do not merge distinct claims into one sentence.",
        "Answer in the language of the user query."};
  }

  void validate() const {
    if (rules.empty()) throw InvalidInputError("synthesis template needs at least one rule");
    if (section_headers.size() != 5)
      throw InvalidInputError("synthesis template needs exactly five section headers");
    for (std::size_t i = 0; i < section_headers.size(); ++i)
      for (std::size_t j = i + 1; j < section_headers.size(); ++j)
        if (section_headers[i] == section_headers[j])
          throw InvalidInputError("synthesis section headers must be distinct");
  }
};

struct SynthesisReport {
  std::string consensus_section;
  std::string partial_section;
  std::string disagreement_section;
  std::string unique_section;
  std::string analysis_section;
  ClaimPartition partition;
  std::vector<ContradictionPair> contradictions;
  /// Set when the synthesizer output was missing headers and the parser
  /// recovered by dumping the remainder into the analysis section.
  bool degraded_structure = false;
};

namespace detail {

inline void append_claim_group(std::ostringstream& out, std::string_view label,
                               const std::vector<ClaimSupport>& group) {
  out << label << ":\n";
  if (group.empty()) {
    out << "  (none)\n";
    return;
  }
  for (const auto& support : group) {
    out << "  - " << support.canonical_claim.statement << " [supported by:";
    for (const auto& expert : support.supporters) out << " " << expert;
    out << "]\n";
  }
}

}  // namespace detail

/// Deterministic prompt assembly: query, the four claim groups labeled by
/// bucket, the numbered rules, and the five required section headers.
inline std::string construct_synthesis_prompt(const ClaimPartition& partition,
                                              const std::vector<ContradictionPair>& contradictions,
                                              const SynthesisPromptTemplate& tmpl,
                                              const std::string& query) {
  tmpl.validate();
  std::ostringstream out;
  out << "You are the synthesis stage of a multi-expert council.\n\n";
  out << "USER QUERY:\n" << query << "\n\n";
  out << "CLAIM EVIDENCE (from " << partition.n_experts << " experts):\n";
  detail::append_claim_group(out, "Consensus claims (all experts)", partition.consensus);
  detail::append_claim_group(out, "Partial-agreement claims", partition.partial);
  out << "Contradictions:\n";
  if (contradictions.empty()) {
    out << "  (none)\n";
  } else {
    for (const auto& pair : contradictions) {
      out << "  - [" << pair.claim_a.source_expert << "] \"" << pair.claim_a.statement
          << "\" vs [" << pair.claim_b.source_expert << "] \"" << pair.claim_b.statement
          << "\"\n";
    }
  }
  detail::append_claim_group(out, "Unique claims (single expert)", partition.unique);
  out << "\nMANDATORY RULES:\n";
  for (std::size_t i = 0; i < tmpl.rules.size(); ++i) {
    out << (i + 1) << ". " << tmpl.rules[i] << "\n";
  }
  out << "\nREQUIRED SECTIONS:\n";
  for (const auto& header : tmpl.section_headers) out << "## " << header << "\n";
  return out.str();
}

/// Split raw synthesizer output into the five sections by '## HEADER'
/// lines. A missing header degrades gracefully: everything not claimed by
/// a found header ends up in the analysis section and the report is
/// flagged as structurally degraded.
inline SynthesisReport parse_synthesis_output(const std::string& raw,
                                              const SynthesisPromptTemplate& tmpl) {
  tmpl.validate();
  struct Found {
    std::size_t header_index;
    std::size_t body_begin;
    std::size_t line_begin;
  };
  std::vector<Found> found;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const std::size_t eol = std::min(raw.find('\n', pos), raw.size());
    const std::string line = text::trim(raw.substr(pos, eol - pos));
    if (line.rfind("##", 0) == 0) {
      const std::string name = text::normalize(line.substr(2));
      for (std::size_t h = 0; h < tmpl.section_headers.size(); ++h) {
        if (name == text::normalize(tmpl.section_headers[h])) {
          found.push_back(Found{h, eol == raw.size() ? raw.size() : eol + 1, pos});
          break;
        }
      }
    }
    if (eol >= raw.size()) break;
    pos = eol + 1;
  }

  std::array<std::string, 5> sections;
  std::array<bool, 5> present{};
  for (std::size_t k = 0; k < found.size(); ++k) {
    const std::size_t end = (k + 1 < found.size()) ? found[k + 1].line_begin : raw.size();
    const std::string body = text::trim(raw.substr(found[k].body_begin, end - found[k].body_begin));
    sections[found[k].header_index] = body;
    present[found[k].header_index] = true;
  }

  SynthesisReport report;
  const bool all_present = std::all_of(present.begin(), present.end(), [](bool b) { return b; });
  if (!all_present) {
    report.degraded_structure = true;
    if (!present[4]) {
      // Recover: the unclaimed remainder (or whole output) becomes analysis.
      sections[4] = found.empty() ? text::trim(raw)
                                  : text::trim(raw.substr(0, found.front().line_begin));
      if (sections[4].empty()) sections[4] = text::trim(raw);
    }
  }
  report.consensus_section = sections[0];
  report.partial_section = sections[1];
  report.disagreement_section = sections[2];
  report.unique_section = sections[3];
  report.analysis_section = sections[4];
  return report;
}

/// Run the synthesizer over a prepared prompt and parse its output.
inline SynthesisReport synthesize_structured(const std::string& prompt, ExpertAgent& synthesizer,
                                             const SynthesisPromptTemplate& tmpl,
                                             const DeltaCallback& on_delta = {}) {
  std::string raw;
  try {
    raw = synthesizer.complete(AgentRequest{prompt, {}, nullptr, on_delta});
  } catch (const std::exception& e) {
    throw AgentError(synthesizer.id(), std::string("synthesis failed: ") + e.what());
  }
  return parse_synthesis_output(raw, tmpl);
}

/// Ablation baseline: modal extracted answer, ties broken by the lowest
/// expert index.
inline std::string majority_vote_baseline(
    const std::vector<ExpertResponse>& responses,
    const std::function<std::optional<std::string>(const ExpertResponse&)>& answer_extractor) {
  if (responses.size() < 2) throw InvalidInputError("majority vote needs at least two responses");
  std::vector<std::string> answers;
  for (const auto& response : responses) {
    if (auto answer = answer_extractor(response)) answers.push_back(*answer);
  }
  if (answers.empty()) throw InvalidInputError("answer extractor failed on every response");
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const std::size_t count = static_cast<std::size_t>(
        std::count(answers.begin(), answers.end(), answers[i]));
    if (count > best_count) {
      best_count = count;
      best = i;
    }
  }
  return answers[best];
}

}  // namespace council
