#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "council/council.hpp"
#include "council/errors.hpp"
#include "council/mock.hpp"
#include "council/remote.hpp"

namespace council {

struct ConfiguredExpert {
  ExpertSpec spec;
  std::string endpoint;  // "host[:port]"; used only for remote agents
};

/// Declarative configuration document: triage config, expert specs,
/// synthesizer spec, quorum, seed.
struct FileConfig {
  std::string preset = "council-noweb";
  std::uint64_t seed = 42;
  int quorum = 2;
  double timeout_seconds = 60.0;
  TriageConfig triage;
  std::vector<ConfiguredExpert> experts;
  ConfiguredExpert synthesizer;
  SynthesisMode synthesis_mode = SynthesisMode::Structured;
  /// The RAG baseline preset exists as a config shape only.
  bool unimplemented = false;
};

namespace config_json {

using nlohmann::json;

inline std::string reasoning_name(ReasoningLevel level) {
  switch (level) {
    case ReasoningLevel::Minimal: return "minimal";
    case ReasoningLevel::Default: return "default";
    case ReasoningLevel::High: return "high";
    case ReasoningLevel::Maximum: return "maximum";
  }
  return "default";
}
inline ReasoningLevel reasoning_from(const std::string& s) {
  if (s == "minimal") return ReasoningLevel::Minimal;
  if (s == "default") return ReasoningLevel::Default;
  if (s == "high") return ReasoningLevel::High;
  if (s == "maximum") return ReasoningLevel::Maximum;
  throw InvalidInputError("unknown reasoning level: " + s);
}

inline json to_json(const ConfiguredExpert& e) {
  json j;
  j["expert_id"] = e.spec.expert_id;
  j["provider"] = e.spec.provider;
  j["model_id"] = e.spec.model_id;
  j["context_budget"] = e.spec.context_budget;
  j["web_enabled"] = e.spec.web_enabled;
  j["endpoint"] = e.endpoint;
  j["generation"] = {{"temperature", e.spec.generation.temperature},
                     {"top_p", e.spec.generation.top_p},
                     {"max_new_tokens", e.spec.generation.max_new_tokens},
                     {"reasoning_level", reasoning_name(e.spec.generation.reasoning_level)}};
  return j;
}

inline ConfiguredExpert expert_from(const json& j) {
  ConfiguredExpert e;
  e.spec.expert_id = j.at("expert_id").get<std::string>();
  e.spec.provider = j.at("provider").get<std::string>();
  e.spec.model_id = j.at("model_id").get<std::string>();
  e.spec.context_budget = j.at("context_budget").get<int>();
  e.spec.web_enabled = j.at("web_enabled").get<bool>();
  e.endpoint = j.value("endpoint", std::string{});
  const auto& g = j.at("generation");
  e.spec.generation.temperature = g.at("temperature").get<double>();
  e.spec.generation.top_p = g.at("top_p").get<double>();
  e.spec.generation.max_new_tokens = g.at("max_new_tokens").get<int>();
  e.spec.generation.reasoning_level = reasoning_from(g.at("reasoning_level").get<std::string>());
  return e;
}

}  // namespace config_json

inline nlohmann::json config_to_json(const FileConfig& cfg) {
  nlohmann::json j;
  j["preset"] = cfg.preset;
  j["seed"] = cfg.seed;
  j["quorum"] = cfg.quorum;
  j["timeout_seconds"] = cfg.timeout_seconds;
  j["triage"] = {{"greeting_patterns", cfg.triage.greeting_patterns},
                 {"max_chars", cfg.triage.max_chars},
                 {"max_tokens", cfg.triage.max_tokens},
                 {"server_temperature", cfg.triage.server_temperature},
                 {"short_circuit", cfg.triage.short_circuit}};
  nlohmann::json experts = nlohmann::json::array();
  for (const auto& e : cfg.experts) experts.push_back(config_json::to_json(e));
  j["experts"] = experts;
  j["synthesizer"] = config_json::to_json(cfg.synthesizer);
  j["synthesis_mode"] =
      cfg.synthesis_mode == SynthesisMode::MajorityVote ? "majority_vote" : "structured";
  j["unimplemented"] = cfg.unimplemented;
  return j;
}

inline FileConfig config_from_json(const nlohmann::json& j) {
  FileConfig cfg;
  cfg.preset = j.value("preset", std::string("custom"));
  cfg.seed = j.value("seed", std::uint64_t{42});
  cfg.quorum = j.value("quorum", 2);
  cfg.timeout_seconds = j.value("timeout_seconds", 60.0);
  if (j.contains("triage")) {
    const auto& t = j.at("triage");
    if (t.contains("greeting_patterns"))
      cfg.triage.greeting_patterns = t.at("greeting_patterns").get<std::vector<std::string>>();
    cfg.triage.max_chars = t.value("max_chars", 18);
    cfg.triage.max_tokens = t.value("max_tokens", 4);
    cfg.triage.server_temperature = t.value("server_temperature", 0.3);
    cfg.triage.short_circuit = t.value("short_circuit", true);
  }
  for (const auto& e : j.at("experts")) cfg.experts.push_back(config_json::expert_from(e));
  cfg.synthesizer = config_json::expert_from(j.at("synthesizer"));
  cfg.synthesis_mode = j.value("synthesis_mode", std::string("structured")) == "majority_vote"
                           ? SynthesisMode::MajorityVote
                           : SynthesisMode::Structured;
  cfg.unimplemented = j.value("unimplemented", false);
  return cfg;
}

inline FileConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return config_from_json(nlohmann::json::parse(buf.str()));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("malformed config " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Named presets mirroring the five experimental settings.
// ---------------------------------------------------------------------------

namespace detail {

inline ConfiguredExpert make_expert(std::string id, std::string provider, std::string model,
                                    int context_budget, bool web, double temperature = 0.5,
                                    double top_p = 0.95, int max_tokens = 4096,
                                    ReasoningLevel level = ReasoningLevel::High) {
  ConfiguredExpert e;
  e.spec.expert_id = std::move(id);
  e.spec.provider = std::move(provider);
  e.spec.model_id = std::move(model);
  e.spec.context_budget = context_budget;
  e.spec.web_enabled = web;
  e.spec.generation = GenerationParams{temperature, top_p, max_tokens, level};
  return e;
}

}  // namespace detail

/// council-noweb | council-web | single-noweb | single-web | rag-baseline.
/// The rag-baseline preset is a config shape only and is marked
/// unimplemented.
inline FileConfig preset_config(const std::string& name) {
  const bool web = name == "council-web" || name == "single-web";
  FileConfig cfg;
  cfg.preset = name;
  auto gpt = detail::make_expert("gpt-5-4", "openai", "gpt-5.4", 272000, web);
  auto claude = detail::make_expert("claude-opus-4-6", "anthropic", "claude-opus-4-6", 200000, web);
  auto gemini =
      detail::make_expert("gemini-3-1-pro", "google", "gemini-3.1-pro-preview", 1048000, web);
  cfg.synthesizer = detail::make_expert("synthesizer", "bytedance", "doubao-seed-2-0-pro", 256000,
                                        web, 0.3, 0.9, 8192, ReasoningLevel::Maximum);
  if (name == "council-noweb" || name == "council-web") {
    cfg.experts = {gpt, claude, gemini};
  } else if (name == "single-noweb" || name == "single-web") {
    cfg.experts = {gpt};
  } else if (name == "rag-baseline") {
    cfg.experts = {gpt};
    cfg.unimplemented = true;  // retrieval index out of scope
  } else {
    throw InvalidInputError("unknown preset: " + name);
  }
  return cfg;
}

/// Ablation knob: shrink or grow the expert roster to `n` (2..4). The
/// fourth expert mirrors the remaining baseline model.
inline FileConfig with_expert_count(FileConfig cfg, int n) {
  if (n < 2 || n > 4) throw InvalidInputError("expert count ablation supports n in [2,4]");
  while (static_cast<int>(cfg.experts.size()) > n) cfg.experts.pop_back();
  if (static_cast<int>(cfg.experts.size()) < n && n == 4) {
    const bool web = !cfg.experts.empty() && cfg.experts.front().spec.web_enabled;
    cfg.experts.push_back(
        detail::make_expert("deepseek-v3-2", "deepseek", "deepseek-v3.2-pro", 128000, web));
  }
  if (static_cast<int>(cfg.experts.size()) != n)
    throw InvalidInputError("preset does not have enough experts for the requested count");
  return cfg;
}

// ---------------------------------------------------------------------------
// Setup builders
// ---------------------------------------------------------------------------

/// Wire a CouncilSetup from deterministic mock agents (scripted experts,
/// echo synthesizer, heuristic classifier). Latencies default to zero.
inline CouncilSetup make_mock_setup(const FileConfig& cfg,
                                    const std::vector<double>& expert_latencies = {},
                                    double synthesizer_latency = 0.0) {
  if (cfg.unimplemented)
    throw InvalidInputError("preset '" + cfg.preset + "' is a config shape only (unimplemented)");
  CouncilSetup setup;
  setup.triage = cfg.triage;
  setup.seed = cfg.seed;
  setup.min_success = cfg.quorum;
  setup.timeout_seconds = cfg.timeout_seconds;
  setup.synthesis_mode = cfg.synthesis_mode;
  const int n = static_cast<int>(cfg.experts.size());
  for (int i = 0; i < n; ++i) {
    const double latency =
        i < static_cast<int>(expert_latencies.size()) ? expert_latencies[static_cast<std::size_t>(i)] : 0.0;
    setup.experts.push_back(std::make_shared<MockCouncilExpert>(
        cfg.experts[static_cast<std::size_t>(i)].spec.expert_id, i, n, latency));
  }
  setup.synthesizer = std::make_shared<EchoSynthesizer>("mock-synthesizer", synthesizer_latency);
  setup.server_classifier = std::make_shared<HeuristicClassifierAgent>(cfg.triage);
  return setup;
}

/// Wire a CouncilSetup with HTTP chat agents per configured endpoint.
/// Credentials come from <PROVIDER>_API_KEY environment variables.
inline CouncilSetup make_remote_setup(const FileConfig& cfg) {
  if (cfg.unimplemented)
    throw InvalidInputError("preset '" + cfg.preset + "' is a config shape only (unimplemented)");
  CouncilSetup setup;
  setup.triage = cfg.triage;
  setup.seed = cfg.seed;
  setup.min_success = cfg.quorum;
  setup.timeout_seconds = cfg.timeout_seconds;
  setup.synthesis_mode = cfg.synthesis_mode;
  for (const auto& expert : cfg.experts) {
    if (expert.endpoint.empty())
      throw InvalidInputError("expert " + expert.spec.expert_id +
                              " has no endpoint; use --mock or add one to the config");
    setup.experts.push_back(std::make_shared<HttpChatAgent>(expert.spec, expert.endpoint));
  }
  if (cfg.synthesizer.endpoint.empty())
    throw InvalidInputError("synthesizer has no endpoint configured");
  setup.synthesizer = std::make_shared<HttpChatAgent>(cfg.synthesizer.spec, cfg.synthesizer.endpoint);
  // The server-side triage classifier stays heuristic unless a remote
  // classifier endpoint is introduced in the config schema.
  setup.server_classifier = std::make_shared<HeuristicClassifierAgent>(cfg.triage);
  return setup;
}

}  // namespace council
