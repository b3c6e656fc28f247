#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cascade/analysis/analysis.hpp"
#include "cascade/attack/attack.hpp"
#include "cascade/metrics/metrics.hpp"
#include "cascade/runner/config.hpp"
#include "cascade/zoo/corpus.hpp"

namespace cascade::runner {

struct BuiltExperiment {
  std::shared_ptr<const zoo::Vocabulary> vocab;
  CascadeSpec spec;
  zoo::SyntheticCorpus corpus;
  std::vector<TokenId> attack_vocab;
};

// Cascade, corpus and attack vocabulary described by the config.
BuiltExperiment build_experiment(const ExperimentConfig& cfg);

// Traces, routing records and metrics for one input set.
struct EvaluatedSet {
  std::vector<ExecutionTrace> traces;
  std::vector<Label> final_stage_predictions;  // f^l run standalone
  std::vector<analysis::RoutingRecord> records;
  metrics::MetricReport metrics;
};

// inputs[k] is the (possibly attacked) input for corpus sample k.
EvaluatedSet evaluate_inputs(const BuiltExperiment& b, const std::vector<TokenSeq>& inputs,
                             std::size_t threads);

struct AttackRun {
  std::string name;  // "single_acc", "joint_p0.40", ...
  std::string mode;
  std::optional<double> pass_rate;
  std::vector<TokenSeq> adversarial;
  std::vector<TokenSeq> suffixes;
  std::vector<nlohmann::json> reports;
  EvaluatedSet eval;
};

attack::AttackConfig make_attack_config(const AttackSection& a, const std::string& mode,
                                        double pass_rate, std::uint64_t seed,
                                        const BuiltExperiment& b);

// One attack mode (or Random-Noise) over every corpus sample.
AttackRun run_attack_mode(const BuiltExperiment& b, const AttackSection& a, const std::string& mode,
                          std::optional<double> pass_rate, std::uint64_t seed, std::size_t threads);

struct RunOptions {
  std::size_t threads = 1;
  bool attacks = true;
  bool defense = true;
  std::optional<std::filesystem::path> output_dir;  // overrides the config
};

// Writes the experiment directory and returns its path:
//   config.json, clean/{traces.jsonl,metrics.json,decomposition.json},
//   attacks/index.json, attacks/<run>/{traces.jsonl,reports.jsonl,suffixes.json,
//   metrics.json,decomposition.json,gap_shift.json}, defense.csv, summary.md
std::filesystem::path run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// JSONL line for one trace with label, query length and the out-of-band
// final-stage prediction.
nlohmann::json trace_line(const ExecutionTrace& trace, const zoo::Sample& sample,
                          std::size_t query_length, const Label& final_stage_prediction);

// Rebuilds routing records from a traces.jsonl file.
std::vector<analysis::RoutingRecord> records_from_trace_lines(const std::vector<nlohmann::json>& lines);

}  // namespace cascade::runner
