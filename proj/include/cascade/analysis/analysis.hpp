#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cascade/analysis/rational.hpp"
#include "cascade/cascade.hpp"
#include "cascade/zoo/corpus.hpp"

namespace cascade::analysis {

// Routing event and correctness bits for one sample.
struct RoutingRecord {
  int sample_id = 0;
  int stage_count = 0;
  int stop_stage = 0;               // the i with S_i(x)
  std::vector<bool> stage_correct;  // f^i(x) = y for i = 1..stop_stage
  std::vector<bool> escalated;      // g^i bits for i = 1..min(stop_stage, l-1)
  bool final_stage_correct = false; // f^l(x) = y, evaluated standalone

  friend bool operator==(const RoutingRecord&, const RoutingRecord&) = default;
};

// `final_prediction` is f^l(x) evaluated out of band; it is not charged to
// the trace's cost.
RoutingRecord routing_record(const ExecutionTrace& trace, int sample_id, const Label& y,
                             const Label& final_prediction);

std::vector<RoutingRecord> routing_stats(std::span<const zoo::Sample> samples,
                                         const CascadeSpec& spec, std::size_t threads = 1);

// Same as routing_stats, reusing already computed traces.
std::vector<RoutingRecord> routing_stats(std::span<const zoo::Sample> samples,
                                         std::span<const ExecutionTrace> traces,
                                         const CascadeSpec& spec, std::size_t threads = 1);

struct DecompositionReport {
  int stages = 0;
  std::int64_t n = 0;
  // Integer counts, indexed by i-1.
  std::vector<std::int64_t> count_S;
  std::vector<std::int64_t> count_stage_err;  // S_i ∧ f^i wrong
  std::vector<std::int64_t> count_final_err;  // S_i ∧ f^l wrong
  std::int64_t cascade_err = 0;               // direct count of A_cas
  std::int64_t final_err = 0;                 // direct count of f^l wrong

  std::vector<Rational> pr_S;
  std::vector<Rational> cond_err_stage;  // 0 where S_i is empty
  std::vector<Rational> cond_err_final;
  Rational pr_A_cas;
  Rational pr_final_err;
  Rational gap;                    // Σ_{i<l} per_term
  std::vector<Rational> per_term;  // l-1 summands

  // Identity checks, all exact.
  bool partition_holds() const;
  bool decomposition_holds() const;
  bool standalone_holds() const;
  bool gap_identity_holds() const;
};

DecompositionReport decomposition(std::span<const RoutingRecord> records);

// Δ(x') − Δ(x) split per stage i < l, with D_i the conditional gap on S_i:
//   routing     (P'_i − P_i)·D_i
//   conditional P_i·(D'_i − D_i)
//   cross       (P'_i − P_i)·(D'_i − D_i)
struct GapShiftReport {
  DecompositionReport clean;
  DecompositionReport adversarial;
  Rational delta_clean;
  Rational delta_adv;
  Rational delta_change;
  std::vector<Rational> routing;
  std::vector<Rational> conditional;
  std::vector<Rational> cross;

  Rational routing_total() const;
  Rational conditional_total() const;
  Rational cross_total() const;
  bool attribution_holds() const;
};

// Pairs records by sample id; throws IntegrityError if the id sets differ.
GapShiftReport gap_shift(std::span<const RoutingRecord> clean,
                         std::span<const RoutingRecord> adversarial);

nlohmann::json rational_to_json(const Rational& r);
nlohmann::json decomposition_to_json(const DecompositionReport& r);
nlohmann::json gap_shift_to_json(const GapShiftReport& r);
nlohmann::json routing_record_to_json(const RoutingRecord& r);
RoutingRecord routing_record_from_json(const nlohmann::json& j);

// Aligned text tables for the CLI.
std::string render_decomposition(const DecompositionReport& r);
std::string render_gap_shift(const GapShiftReport& r);

}  // namespace cascade::analysis
