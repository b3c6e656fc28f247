#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cascade/cascade.hpp"
#include "cascade/zoo/vocabulary.hpp"

namespace cascade::metrics {

// Lowercase, drop characters that are neither alphanumeric nor whitespace,
// collapse whitespace runs, trim.
std::string normalize_answer(std::string_view text);
bool exact_match(std::string_view pred, std::string_view gold);

// Class labels compare by id; answer labels by normalized decoded text when a
// vocabulary is given, token-exact otherwise.
bool same_answer(const Label& a, const Label& b, const zoo::Vocabulary* vocab = nullptr);

// Mean of label matches. Throws IntegrityError on empty input or a length
// mismatch.
double accuracy(std::span<const Label> predictions, std::span<const Label> labels,
                const zoo::Vocabulary* vocab = nullptr);

struct Coverage {
  double fraction = 0.0;
  bool full = false;
};

// Fraction of concepts present as normalized words of the text. Throws
// ConfigError for an empty concept set.
Coverage full_coverage(std::string_view generated, const std::vector<std::string>& concepts);
Coverage full_coverage(const TokenSeq& generated, const zoo::Vocabulary& vocab,
                       const std::vector<std::string>& concepts);

inline constexpr double kInputTokenRate = 0.01;
inline constexpr double kOutputTokenRate = 0.03;

// Σ over executed components of (0.01·in + 0.03·out)·param_scale, divided by
// query_length. A decider reads the input plus the stage's output and emits
// one token. Throws ConfigError when query_length is 0.
double normalized_token_cost(const ExecutionTrace& trace, std::size_t query_length);
double normalized_token_cost(const nlohmann::json& trace, std::size_t query_length);

// ρ_i = #(stop_stage > i) / N for i = 1..stages-1.
std::vector<double> pass_rate(std::span<const int> stop_stages, int stages);
std::vector<double> pass_rate(std::span<const ExecutionTrace> traces);

// counts[correct][escalated] over samples that reach decider `stage`.
struct DmConfusion {
  int stage = 1;
  std::array<std::array<std::int64_t, 2>, 2> counts{};
  std::int64_t total() const;
};

std::vector<DmConfusion> dm_confusion(std::span<const ExecutionTrace> traces,
                                      std::span<const Label> labels);

struct MetricReport {
  std::string task_metric_name = "accuracy";
  double task_metric = 0.0;
  double normalized_token_cost = 0.0;  // mean over samples
  double simulated_time = 0.0;         // mean total_cost
  std::vector<double> pass_rates;
  std::vector<DmConfusion> dm_confusion;
  std::size_t n = 0;
};

// query_lengths holds |x| of the original, unattacked query per sample.
MetricReport metric_report(std::span<const ExecutionTrace> traces, std::span<const Label> labels,
                           std::span<const std::size_t> query_lengths,
                           const zoo::Vocabulary* vocab = nullptr);

nlohmann::json report_to_json(const MetricReport& r);
MetricReport report_from_json(const nlohmann::json& j);

// Markdown table with columns Performance, Token cost, Time cost, Passrate_i.
std::string render_markdown(const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace cascade::metrics
