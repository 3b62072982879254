// Command-line front end: ask, serve, simulate, stats, triage-eval, replay.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "council/config.hpp"
#include "council/cost.hpp"
#include "council/council.hpp"
#include "council/errorsim.hpp"
#include "council/server.hpp"
#include "council/sse.hpp"
#include "council/stats.hpp"
#include "council/transcript.hpp"
#include "council/triage.hpp"

namespace {

using namespace council;

std::vector<double> parse_csv_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(std::stod(field));
  return out;
}

/// Whitespace-separated column file; every row must have the same width.
std::vector<std::vector<double>> read_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open input file: " + path);
  std::vector<std::vector<double>> columns;
  std::string line;
  while (std::getline(in, line)) {
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split_whitespace(trimmed);
    if (columns.empty()) columns.resize(fields.size());
    if (fields.size() != columns.size())
      throw InvalidInputError("ragged row in column file: " + path);
    for (std::size_t i = 0; i < fields.size(); ++i)
      columns[i].push_back(std::stod(fields[i]));
  }
  if (columns.empty()) throw InvalidInputError("empty column file: " + path);
  return columns;
}

std::vector<std::vector<std::string>> read_label_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open input file: " + path);
  std::vector<std::vector<std::string>> columns;
  std::string line;
  while (std::getline(in, line)) {
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split_whitespace(trimmed);
    if (columns.empty()) columns.resize(fields.size());
    if (fields.size() != columns.size())
      throw InvalidInputError("ragged row in column file: " + path);
    for (std::size_t i = 0; i < fields.size(); ++i) columns[i].push_back(fields[i]);
  }
  if (columns.empty()) throw InvalidInputError("empty column file: " + path);
  return columns;
}

/// Line-delimited key-value records: tab- or space-separated `key=value`
/// fields; `query` may contain spaces so it must be the last field.
std::vector<LabeledQuery> read_triage_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open dataset: " + path);
  std::vector<LabeledQuery> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::size_t gold_pos = trimmed.find("gold=");
    const std::size_t query_pos = trimmed.find("query=");
    if (gold_pos == std::string::npos || query_pos == std::string::npos || query_pos < gold_pos)
      throw InvalidInputError("dataset line " + std::to_string(line_no) +
                              ": expected 'gold=<label> query=<text>'");
    LabeledQuery item;
    const std::string gold =
        text::trim(trimmed.substr(gold_pos + 5, query_pos - (gold_pos + 5)));
    if (gold == "trivial")
      item.gold = Verdict::Trivial;
    else if (gold == "nontrivial")
      item.gold = Verdict::Nontrivial;
    else
      throw InvalidInputError("dataset line " + std::to_string(line_no) + ": unknown gold label '" +
                              gold + "'");
    item.query = text::trim(trimmed.substr(query_pos + 6));
    items.push_back(std::move(item));
  }
  if (items.empty()) throw InvalidInputError("dataset has no records: " + path);
  return items;
}

FileConfig resolve_config(const std::string& config_path, const std::string& preset,
                          std::uint64_t seed, bool seed_set) {
  FileConfig cfg = !config_path.empty() ? load_config(config_path) : preset_config(preset);
  if (!config_path.empty() && !preset.empty() && preset != cfg.preset)
    throw InvalidInputError("--preset conflicts with the preset stored in " + config_path);
  if (seed_set) cfg.seed = seed;
  return cfg;
}

void print_report(const CouncilResult& result) {
  if (result.bypassed) {
    std::cout << "[triage bypass]\n" << *result.direct_answer << "\n";
    return;
  }
  const SynthesisReport& r = result.report;
  std::cout << "## FULL CONSENSUS\n" << r.consensus_section << "\n";
  std::cout << "## PARTIAL AGREEMENT\n" << r.partial_section << "\n";
  std::cout << "## DISAGREEMENTS\n" << r.disagreement_section << "\n";
  std::cout << "## UNIQUE FINDINGS\n" << r.unique_section << "\n";
  std::cout << "## COMPREHENSIVE ANALYSIS\n" << r.analysis_section << "\n";
  std::fprintf(stderr, "latency_total=%.3f synthesis_latency=%.3f experts=%zu\n",
               result.latency.total, result.latency.synthesis_latency, result.responses.size());
}

int cmd_ask(const std::string& query, const FileConfig& cfg, bool mock, bool majority_vote,
            const std::string& out_path) {
  FileConfig effective = cfg;
  if (majority_vote) effective.synthesis_mode = SynthesisMode::MajorityVote;

  if (effective.experts.size() == 1) {
    // Single-model baseline: one direct call, no synthesis pipeline.
    AgentPtr agent;
    if (mock) {
      agent = std::make_shared<MockCouncilExpert>(effective.experts[0].spec.expert_id, 0, 1);
    } else {
      if (effective.experts[0].endpoint.empty())
        throw InvalidInputError("single-model preset needs an endpoint or --mock");
      agent = std::make_shared<HttpChatAgent>(effective.experts[0].spec,
                                              effective.experts[0].endpoint);
    }
    AgentRequest request{query, Session{}, nullptr, nullptr};
    std::cout << agent->complete(request) << "\n";
    return 0;
  }

  const CouncilSetup setup = mock ? make_mock_setup(effective) : make_remote_setup(effective);
  const CouncilResult result = run_council(query, Session{}, setup);
  print_report(result);
  if (!out_path.empty()) {
    persist_transcript(make_transcript(result, config_to_json(effective)), out_path);
    std::fprintf(stderr, "transcript=%s\n", out_path.c_str());
  }
  return 0;
}

int cmd_serve(const std::string& bind, const FileConfig& cfg, bool mock) {
  const std::size_t colon = bind.rfind(':');
  if (colon == std::string::npos)
    throw InvalidInputError("--bind expects host:port, got '" + bind + "'");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));
  CouncilServer server(mock ? make_mock_setup(cfg) : make_remote_setup(cfg));
  std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), port);
  if (!server.listen(host, port)) {
    std::fprintf(stderr, "failed to bind %s:%d\n", host.c_str(), port);
    return 1;
  }
  return 0;
}

int cmd_simulate(int n, const std::string& marginals_csv, double target_rho, long long trials,
                 std::uint64_t seed, const std::string& out_path) {
  const std::vector<double> marginals = parse_csv_doubles(marginals_csv);
  if (static_cast<int>(marginals.size()) != n)
    throw InvalidInputError("--marginals must list exactly --n values");
  const errorsim::ErrorModelParams params =
      errorsim::calibrate_shared_factor(n, marginals, target_rho, seed);
  const errorsim::SimulationResult result = errorsim::simulate(params, trials);

  std::ostringstream summary;
  summary << "# trials=" << result.trials << " seed=" << seed << " target_rho=" << target_rho
          << "\n";
  for (int i = 0; i < n; ++i)
    summary << "# marginal_" << i << "=" << result.empirical_marginals[static_cast<std::size_t>(i)]
            << "\n";
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      summary << "# rho_" << i << "_" << j << "="
              << result.pairwise_rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
              << "\n";
  summary << "# joint_all=" << result.empirical_joint_all << "\n";
  double max_rho = 0.0, max_p = 0.0;
  for (int i = 0; i < n; ++i) {
    max_p = std::max(max_p, result.empirical_marginals[static_cast<std::size_t>(i)]);
    for (int j = i + 1; j < n; ++j)
      max_rho = std::max(
          max_rho, result.pairwise_rho[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  summary << "# joint_bound=" << errorsim::joint_bound(max_p, max_rho, n) << "\n";

  std::ofstream out(out_path);
  if (!out) throw InvalidInputError("cannot open output file: " + out_path);
  for (long long t = 0; t < result.trials; ++t) {
    out << "trial=" << t;
    for (int i = 0; i < n; ++i)
      out << " e" << i << "="
          << static_cast<int>(
                 result.indicators[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(t)]);
    out << "\n";
  }
  out << summary.str();
  if (!out) throw StorageError("failed writing simulation output: " + out_path);
  std::cout << summary.str();
  return 0;
}

int cmd_stats_rho(const std::string& input) {
  const auto columns = read_columns(input);
  std::vector<stats::IndicatorSeries> series(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    series[i].label = "col_" + std::to_string(i);
    for (double v : columns[i]) series[i].values.push_back(v != 0.0 ? 1 : 0);
  }
  for (std::size_t i = 0; i < series.size(); ++i)
    for (std::size_t j = i + 1; j < series.size(); ++j)
      std::cout << "rho_" << i << "_" << j << "="
                << stats::pearson_error_correlation(series[i], series[j]) << "\n";
  return 0;
}

int cmd_stats_ci(const std::string& input, int resamples, double level, std::uint64_t seed) {
  const auto columns = read_columns(input);
  if (columns.size() != 1) throw InvalidInputError("ci expects a single-column input file");
  const auto& samples = columns[0];
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto [lo, hi] = stats::bootstrap_ci(samples, mean, resamples, level, seed);
  std::cout << "mean=" << mean(samples) << "\n"
            << "ci_low=" << lo << "\n"
            << "ci_high=" << hi << "\n"
            << "level=" << level << "\n"
            << "resamples=" << resamples << "\n";
  return 0;
}

int cmd_stats_levene(const std::string& input) {
  const auto columns = read_columns(input);
  stats::GroupScores scores;
  for (std::size_t i = 0; i < columns.size(); ++i)
    scores.groups["group_" + std::to_string(i)] = columns[i];
  const auto [w, p] = stats::levene_test(scores);
  std::cout << "levene_w=" << w << "\n"
            << "levene_p=" << p << "\n"
            << "eta_squared=" << stats::eta_squared(scores) << "\n"
            << "large_effect_threshold=" << stats::kLargeEffectEtaSquared << "\n";
  return 0;
}

int cmd_stats_kappa(const std::string& input) {
  const auto columns = read_label_columns(input);
  if (columns.size() != 2) throw InvalidInputError("kappa expects a two-column label file");
  std::cout << "kappa=" << stats::cohens_kappa(columns[0], columns[1]) << "\n";
  return 0;
}

int cmd_stats_cost(double single_cost, double single_quality, double council_cost,
                   double council_quality, double single_latency, double council_latency) {
  CostParams single{single_cost, single_quality, single_latency, 0, 0, 0.0, 0.0};
  CostParams team{council_cost, council_quality, council_latency, 0, 0, 0.0, 0.0};
  const CostReport report = cost_report(single, team);
  std::cout << "cost_ratio=" << report.cost_ratio << "\n"
            << "quality_ratio=" << report.quality_ratio << "\n"
            << "latency_ratio=" << report.latency_ratio << "\n"
            << "single_cost_per_qaca=" << report.single_cost_per_qaca << "\n"
            << "council_cost_per_qaca=" << report.council_cost_per_qaca << "\n"
            << "single_qaca_per_dollar=" << report.single_qaca_per_dollar << "\n"
            << "council_qaca_per_dollar=" << report.council_qaca_per_dollar << "\n";
  if (report.marginal_cost_per_qaca)
    std::cout << "marginal_cost_per_qaca=" << *report.marginal_cost_per_qaca << "\n";
  std::cout << "estimated_cost_per_council_query="
            << estimate_query_cost(study_council_calls(), study_pricing()) << "\n";
  return 0;
}

int cmd_triage_eval(const std::string& dataset_path, const FileConfig& cfg) {
  const auto labeled = read_triage_dataset(dataset_path);
  HeuristicClassifierAgent classifier(cfg.triage);
  const TriageMetrics m = evaluate_triage(labeled, cfg.triage, classifier);
  std::cout << "items=" << labeled.size() << "\n"
            << "accuracy=" << m.accuracy << "\n"
            << "false_bypass_rate=" << m.false_bypass_rate << "\n"
            << "trivial_fraction=" << m.trivial_fraction << "\n"
            << "nontrivial_fraction=" << m.nontrivial_fraction << "\n";
  return 0;
}

int cmd_replay(const std::string& transcript_path) {
  const ReplayReport report = replay_transcript(std::filesystem::path(transcript_path));
  if (report.clean()) {
    std::cout << "mismatches=0\n";
    return 0;
  }
  std::cout << "mismatches=" << report.mismatches.size() << "\n";
  for (const auto& m : report.mismatches) std::cout << "mismatch=" << m << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Council consensus pipeline"};
  app.require_subcommand(1);

  std::string query, config_path, preset, bind = "127.0.0.1:8080", out_path;
  std::string dataset_path, input_path, transcript_path, marginals_csv = "0.2,0.2,0.2";
  bool mock = false, majority_vote = false;
  std::uint64_t seed = 42;
  int n_experts = 3, resamples = 1000;
  long long trials = 1000000;
  double target_rho = 0.0, level = 0.95;
  double single_cost = 0.0, single_quality = 0.0, council_cost = 0.0, council_quality = 0.0;
  double single_latency = 0.0, council_latency = 0.0;

  auto* ask = app.add_subcommand("ask", "Run one query through the council");
  ask->add_option("query", query, "The user query")->required();
  ask->add_option("--config", config_path, "Config file path");
  ask->add_option("--preset", preset,
                  "council-noweb|council-web|single-noweb|single-web|rag-baseline");
  ask->add_flag("--mock", mock, "Use deterministic local agents");
  auto* ask_seed = ask->add_option("--seed", seed, "Override the config seed");
  ask->add_flag("--majority-vote", majority_vote, "Ablation: modal answer instead of synthesis");
  ask->add_option("--out", out_path, "Persist the run transcript to this path");

  auto* serve = app.add_subcommand("serve", "HTTP service with SSE streaming");
  serve->add_option("--bind", bind, "host:port")->required();
  serve->add_option("--config", config_path, "Config file path");
  serve->add_option("--preset", preset, "Named preset when no config file is given");
  serve->add_flag("--mock", mock, "Use deterministic local agents");
  auto* serve_seed = serve->add_option("--seed", seed, "Override the config seed");

  auto* simulate = app.add_subcommand("simulate", "Correlated-error Monte Carlo simulation");
  simulate->add_option("--n", n_experts, "Number of experts")->required();
  simulate->add_option("--marginals", marginals_csv, "Comma-separated marginal error rates")
      ->required();
  simulate->add_option("--target-rho", target_rho, "Uniform pairwise correlation target")
      ->required();
  simulate->add_option("--trials", trials, "Trial count")->required();
  simulate->add_option("--seed", seed, "RNG seed")->required();
  simulate->add_option("--out", out_path, "Output record file")->required();

  auto* stats_cmd = app.add_subcommand("stats", "Statistics toolkit");
  stats_cmd->require_subcommand(1);
  auto* rho = stats_cmd->add_subcommand("rho", "Pairwise error correlations");
  rho->add_option("--input", input_path, "0/1 indicator column file")->required();
  auto* ci = stats_cmd->add_subcommand("ci", "Bootstrap confidence interval for the mean");
  ci->add_option("--input", input_path, "Single-column sample file")->required();
  ci->add_option("--resamples", resamples, "Bootstrap resamples");
  ci->add_option("--level", level, "Confidence level");
  ci->add_option("--seed", seed, "RNG seed");
  auto* levene = stats_cmd->add_subcommand("levene", "Variance homogeneity across groups");
  levene->add_option("--input", input_path, "One column per group")->required();
  auto* kappa = stats_cmd->add_subcommand("kappa", "Inter-rater agreement");
  kappa->add_option("--input", input_path, "Two-column label file")->required();
  auto* cost = stats_cmd->add_subcommand("cost", "Cost-effectiveness report");
  cost->add_option("--single-cost", single_cost, "Single model cost per 1000 queries")->required();
  cost->add_option("--single-quality", single_quality, "Single model quality in (0,1]")
      ->required();
  cost->add_option("--council-cost", council_cost, "Council cost per 1000 queries")->required();
  cost->add_option("--council-quality", council_quality, "Council quality in (0,1]")->required();
  cost->add_option("--single-latency", single_latency, "Single model median latency seconds");
  cost->add_option("--council-latency", council_latency, "Council median latency seconds");

  auto* triage_eval = app.add_subcommand("triage-eval", "Evaluate triage on a labeled dataset");
  triage_eval->add_option("--dataset", dataset_path,
                          "Line-delimited records: gold=<trivial|nontrivial> query=<text>")
      ->required();
  triage_eval->add_option("--config", config_path, "Config file path");
  auto* triage_seed = triage_eval->add_option("--seed", seed, "Override the config seed");

  auto* replay = app.add_subcommand("replay", "Verify a stored run transcript");
  replay->add_option("--transcript", transcript_path, "Transcript path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ask->parsed()) {
      const FileConfig cfg = resolve_config(config_path, preset.empty() ? "council-noweb" : preset,
                                            seed, ask_seed->count() > 0);
      return cmd_ask(query, cfg, mock, majority_vote, out_path);
    }
    if (serve->parsed()) {
      const FileConfig cfg = resolve_config(config_path, preset.empty() ? "council-noweb" : preset,
                                            seed, serve_seed->count() > 0);
      return cmd_serve(bind, cfg, mock);
    }
    if (simulate->parsed())
      return cmd_simulate(n_experts, marginals_csv, target_rho, trials, seed, out_path);
    if (rho->parsed()) return cmd_stats_rho(input_path);
    if (ci->parsed()) return cmd_stats_ci(input_path, resamples, level, seed);
    if (levene->parsed()) return cmd_stats_levene(input_path);
    if (kappa->parsed()) return cmd_stats_kappa(input_path);
    if (cost->parsed())
      return cmd_stats_cost(single_cost, single_quality, council_cost, council_quality,
                            single_latency, council_latency);
    if (triage_eval->parsed()) {
      const FileConfig cfg = resolve_config(config_path, "council-noweb", seed,
                                            triage_seed->count() > 0);
      return cmd_triage_eval(dataset_path, cfg);
    }
    if (replay->parsed()) return cmd_replay(transcript_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
