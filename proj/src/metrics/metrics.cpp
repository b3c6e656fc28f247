#include "cascade/metrics/metrics.hpp"

#include <cctype>
#include <cstdio>
#include <set>

#include "cascade/errors.hpp"

namespace cascade::metrics {

using nlohmann::json;

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (!std::isalnum(c)) continue;
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

bool exact_match(std::string_view pred, std::string_view gold) {
  return normalize_answer(pred) == normalize_answer(gold);
}

bool same_answer(const Label& a, const Label& b, const zoo::Vocabulary* vocab) {
  if (a.is_class() != b.is_class()) return false;
  if (a.is_class()) return a.class_id() == b.class_id();
  if (!vocab) return a.answer() == b.answer();
  return exact_match(zoo::decode(*vocab, a.answer()), zoo::decode(*vocab, b.answer()));
}

double accuracy(std::span<const Label> predictions, std::span<const Label> labels,
                const zoo::Vocabulary* vocab) {
  if (predictions.size() != labels.size()) {
    throw IntegrityError("accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw IntegrityError("accuracy of an empty set is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += same_answer(predictions[i], labels[i], vocab) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

Coverage full_coverage(std::string_view generated, const std::vector<std::string>& concepts) {
  if (concepts.empty()) throw ConfigError("full_coverage needs at least one concept");
  std::set<std::string> words;
  for (const auto& w : zoo::split_words(normalize_answer(generated))) words.insert(w);
  std::size_t present = 0;
  for (const auto& c : concepts) present += words.count(normalize_answer(c)) ? 1 : 0;
  Coverage cov;
  cov.fraction = static_cast<double>(present) / static_cast<double>(concepts.size());
  cov.full = present == concepts.size();
  return cov;
}

Coverage full_coverage(const TokenSeq& generated, const zoo::Vocabulary& vocab,
                       const std::vector<std::string>& concepts) {
  return full_coverage(zoo::decode(vocab, generated), concepts);
}

namespace {

double component(double in, double out, double scale) {
  return (kInputTokenRate * in + kOutputTokenRate * out) * scale;
}

}  // namespace

double normalized_token_cost(const ExecutionTrace& trace, std::size_t query_length) {
  if (query_length == 0) throw ConfigError("normalized token cost needs a non-empty query");
  double total = 0.0;
  for (const auto& s : trace.per_stage) {
    const auto in = static_cast<double>(s.input_tokens);
    const auto out = static_cast<double>(s.output.output_token_count);
    total += component(in, out, s.model_scale);
    if (s.decision) total += component(in + out, 1.0, s.decider_scale);
  }
  return total / static_cast<double>(query_length);
}

double normalized_token_cost(const json& trace, std::size_t query_length) {
  if (query_length == 0) throw ConfigError("normalized token cost needs a non-empty query");
  try {
    double total = 0.0;
    for (const auto& s : trace.at("per_stage")) {
      const double in = s.at("input_tokens").get<double>();
      const double out = s.at("output_token_count").get<double>();
      total += component(in, out, s.at("model_scale").get<double>());
      if (!s.at("decision").is_null()) total += component(in + out, 1.0, s.at("decider_scale").get<double>());
    }
    return total / static_cast<double>(query_length);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed trace: ") + e.what());
  }
}

std::vector<double> pass_rate(std::span<const int> stop_stages, int stages) {
  if (stop_stages.empty()) throw IntegrityError("pass rate of an empty set is undefined");
  std::vector<double> rho;
  const auto n = static_cast<double>(stop_stages.size());
  for (int i = 1; i < stages; ++i) {
    std::size_t passed = 0;
    for (int s : stop_stages) passed += s > i ? 1 : 0;
    rho.push_back(static_cast<double>(passed) / n);
  }
  return rho;
}

std::vector<double> pass_rate(std::span<const ExecutionTrace> traces) {
  if (traces.empty()) throw IntegrityError("pass rate of an empty set is undefined");
  std::vector<int> stops;
  for (const auto& t : traces) stops.push_back(t.stopping_index);
  return pass_rate(stops, traces.front().stage_count);
}

std::int64_t DmConfusion::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

std::vector<DmConfusion> dm_confusion(std::span<const ExecutionTrace> traces,
                                      std::span<const Label> labels) {
  if (traces.size() != labels.size()) throw IntegrityError("dm_confusion: traces and labels differ in length");
  if (traces.empty()) return {};
  const int l = traces.front().stage_count;
  std::vector<DmConfusion> out(static_cast<std::size_t>(std::max(l - 1, 0)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i].stage = static_cast<int>(i + 1);
  for (std::size_t k = 0; k < traces.size(); ++k) {
    for (const auto& s : traces[k].per_stage) {
      if (!s.decision) continue;
      const bool correct = same_answer(s.output.prediction, labels[k]);
      ++out[static_cast<std::size_t>(s.stage - 1)].counts[correct ? 1 : 0][s.decision->escalate ? 1 : 0];
    }
  }
  return out;
}

MetricReport metric_report(std::span<const ExecutionTrace> traces, std::span<const Label> labels,
                           std::span<const std::size_t> query_lengths,
                           const zoo::Vocabulary* vocab) {
  if (traces.size() != labels.size() || traces.size() != query_lengths.size()) {
    throw IntegrityError("metric_report: traces, labels and query lengths differ in length");
  }
  std::vector<Label> preds;
  preds.reserve(traces.size());
  for (const auto& t : traces) preds.push_back(t.final_output);
  MetricReport r;
  r.n = traces.size();
  if (!labels.empty() && !labels.front().is_class()) r.task_metric_name = "exact_match";
  r.task_metric = accuracy(preds, labels, vocab);
  double token = 0.0, time = 0.0;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    token += normalized_token_cost(traces[k], query_lengths[k]);
    time += traces[k].total_cost;
  }
  r.normalized_token_cost = token / static_cast<double>(r.n);
  r.simulated_time = time / static_cast<double>(r.n);
  r.pass_rates = pass_rate(traces);
  r.dm_confusion = dm_confusion(traces, labels);
  return r;
}

json report_to_json(const MetricReport& r) {
  json cm = json::array();
  for (const auto& c : r.dm_confusion) {
    cm.push_back(json{{"stage", c.stage},
                      {"correct_stop", c.counts[1][0]},
                      {"correct_escalate", c.counts[1][1]},
                      {"wrong_stop", c.counts[0][0]},
                      {"wrong_escalate", c.counts[0][1]}});
  }
  return json{{"n", r.n},
              {"task_metric", {{"name", r.task_metric_name}, {"value", r.task_metric}}},
              {"normalized_token_cost", r.normalized_token_cost},
              {"simulated_time", r.simulated_time},
              {"pass_rates", r.pass_rates},
              {"dm_confusion", std::move(cm)}};
}

MetricReport report_from_json(const json& j) {
  try {
    MetricReport r;
    r.n = j.at("n").get<std::size_t>();
    r.task_metric_name = j.at("task_metric").at("name").get<std::string>();
    r.task_metric = j.at("task_metric").at("value").get<double>();
    r.normalized_token_cost = j.at("normalized_token_cost").get<double>();
    r.simulated_time = j.at("simulated_time").get<double>();
    r.pass_rates = j.at("pass_rates").get<std::vector<double>>();
    for (const auto& c : j.at("dm_confusion")) {
      DmConfusion d;
      d.stage = c.at("stage").get<int>();
      d.counts[1][0] = c.at("correct_stop").get<std::int64_t>();
      d.counts[1][1] = c.at("correct_escalate").get<std::int64_t>();
      d.counts[0][0] = c.at("wrong_stop").get<std::int64_t>();
      d.counts[0][1] = c.at("wrong_escalate").get<std::int64_t>();
      r.dm_confusion.push_back(d);
    }
    return r;
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed metric report: ") + e.what());
  }
}

std::string render_markdown(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::size_t boundaries = 0;
  for (const auto& [_, r] : rows) boundaries = std::max(boundaries, r.pass_rates.size());
  std::string out = "| Setting | Performance | Token cost | Time cost |";
  std::string sep = "|---|---|---|---|";
  for (std::size_t i = 0; i < boundaries; ++i) {
    out += " Passrate_" + std::to_string(i + 1) + " |";
    sep += "---|";
  }
  out += "\n" + sep + "\n";
  char buf[64];
  for (const auto& [name, r] : rows) {
    out += "| " + name + " |";
    std::snprintf(buf, sizeof buf, " %.4f | %.4f | %.4f |", r.task_metric, r.normalized_token_cost,
                  r.simulated_time);
    out += buf;
    for (std::size_t i = 0; i < boundaries; ++i) {
      if (i < r.pass_rates.size()) {
        std::snprintf(buf, sizeof buf, " %.4f |", r.pass_rates[i]);
        out += buf;
      } else {
        out += " - |";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace cascade::metrics
