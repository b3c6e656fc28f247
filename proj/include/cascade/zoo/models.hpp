#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "cascade/cascade.hpp"

namespace cascade::zoo {

// Top-1 minus top-2 softmax probability; 1 for a single class.
double softmax_margin(const std::vector<double>& scores);

double sigmoid(double z);

struct TableEntry {
  int label = 0;
  double margin = 0.0;
  friend bool operator==(const TableEntry&, const TableEntry&) = default;
};

// Lookup-table stage model keyed by TokenSeq::hash(). Scores carry `margin`
// on the stored class and 0 elsewhere, which lets fixtures control both the
// prediction and (through the margin) the downstream decider's confidence.
class TableModel final : public StageModel {
 public:
  TableModel(int class_count, std::unordered_map<std::uint64_t, TableEntry> entries,
             TableEntry fallback, CostModel cost = {}, double param_scale = 1.0,
             int output_tokens = 1);

  StageOutput predict(const TokenSeq& x) const override;
  std::string kind() const override { return "table"; }
  nlohmann::json to_json() const override;

  static std::shared_ptr<TableModel> from_json(const nlohmann::json& j);

  const TableEntry* find(const TokenSeq& x) const;
  std::size_t entry_count() const { return entries_.size(); }

 private:
  std::unordered_map<std::uint64_t, TableEntry> entries_;
  TableEntry fallback_;
};

// scores(x) = bias + Σ_{t ∈ x} weights[t]. Additive in the tokens, so a
// suffix moves the scores by exactly the sum of its weight rows.
class LinearBagModel final : public StageModel {
 public:
  // weights is row-major [vocab_size × class_count].
  LinearBagModel(std::size_t vocab_size, int class_count, std::vector<double> weights,
                 std::vector<double> bias, CostModel cost = {}, double param_scale = 1.0,
                 int output_tokens = 1);

  StageOutput predict(const TokenSeq& x) const override;
  std::string kind() const override { return "linear_bag"; }
  nlohmann::json to_json() const override;
  std::size_t vocab_size() const override { return vocab_size_; }

  static std::shared_ptr<LinearBagModel> from_json(const nlohmann::json& j);

  std::vector<double> scores(const TokenSeq& x) const;
  std::span<const double> row(TokenId t) const;
  const std::vector<double>& bias() const { return bias_; }

 private:
  std::size_t vocab_size_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

// Escalates iff softmax_margin(scores) < threshold.
class ThresholdDecider final : public DecisionModule {
 public:
  explicit ThresholdDecider(double threshold, CostModel cost = {}, double param_scale = 0.0);

  Decision decide(const TokenSeq& x, const StageOutput& y) const override;
  std::string kind() const override { return "threshold"; }
  nlohmann::json to_json() const override;

  static std::shared_ptr<ThresholdDecider> from_json(const nlohmann::json& j);

  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

// confidence = sigmoid(bias + Σ_{t ∈ x} weights[t] + margin_weight·softmax_margin(y));
// escalates iff confidence < threshold.
class LinearDecider final : public DecisionModule {
 public:
  LinearDecider(std::vector<double> weights, double bias, double threshold,
                double margin_weight = 1.0, CostModel cost = {}, double param_scale = 0.0);

  Decision decide(const TokenSeq& x, const StageOutput& y) const override;
  std::string kind() const override { return "linear"; }
  nlohmann::json to_json() const override;
  std::size_t vocab_size() const override { return weights_.size(); }

  static std::shared_ptr<LinearDecider> from_json(const nlohmann::json& j);

  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  double bias_;
  double threshold_;
  double margin_weight_;
};

CostModel cost_from_json(const nlohmann::json& j);

}  // namespace cascade::zoo
