#include "cascade/analysis/analysis.hpp"
#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"

namespace cascade::analysis {

RoutingRecord routing_record(const ExecutionTrace& trace, int sample_id, const Label& y,
                             const Label& final_prediction) {
  RoutingRecord r;
  r.sample_id = sample_id;
  r.stage_count = trace.stage_count;
  r.stop_stage = trace.stopping_index;
  for (const auto& s : trace.per_stage) {
    r.stage_correct.push_back(s.output.prediction == y);
    if (s.decision) r.escalated.push_back(s.decision->escalate);
  }
  r.final_stage_correct = final_prediction == y;
  return r;
}

std::vector<RoutingRecord> routing_stats(std::span<const zoo::Sample> samples,
                                         std::span<const ExecutionTrace> traces,
                                         const CascadeSpec& spec, std::size_t threads) {
  if (traces.size() != samples.size()) {
    throw IntegrityError("routing_stats: " + std::to_string(traces.size()) + " traces for " +
                         std::to_string(samples.size()) + " samples");
  }
  const int l = spec.stage_count();
  return parallel_map(samples.size(), threads, [&](std::size_t k) {
    const auto& s = samples[k];
    const auto& t = traces[k];
    // Reuse f^l when the cascade already ran it.
    const Label final_pred = t.stopping_index == l ? t.final_output
                                                   : spec.stage(l).predict(s.input).prediction;
    return routing_record(t, s.id, s.label, final_pred);
  });
}

std::vector<RoutingRecord> routing_stats(std::span<const zoo::Sample> samples,
                                         const CascadeSpec& spec, std::size_t threads) {
  const auto traces = parallel_map(samples.size(), threads, [&](std::size_t k) {
    return run_cascade(spec, samples[k].input);
  });
  return routing_stats(samples, traces, spec, threads);
}

}  // namespace cascade::analysis
