#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cascade/token_seq.hpp"

namespace cascade {

// Simulated execution cost: per_token * |x| + fixed. Units are abstract and
// deterministic; wall-clock time is never measured.
struct CostModel {
  double per_token = 0.0;
  double fixed = 0.0;

  double cost(std::size_t length) const { return per_token * static_cast<double>(length) + fixed; }
  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct StageOutput {
  Label prediction;
  std::vector<double> scores;
  int output_token_count = 1;

  // Prediction = argmax of scores, lowest index on ties.
  static StageOutput from_scores(std::vector<double> scores, int output_token_count = 1);
};

std::size_t argmax(const std::vector<double>& scores);

// f^i. Implementations must be pure: identical inputs give identical outputs.
class StageModel {
 public:
  virtual ~StageModel() = default;

  virtual StageOutput predict(const TokenSeq& x) const = 0;
  virtual double cost_of(const TokenSeq& x) const { return cost_.cost(x.size()); }
  virtual std::string kind() const = 0;
  virtual nlohmann::json to_json() const = 0;
  // Size of the vocabulary the model was built for; 0 accepts any.
  virtual std::size_t vocab_size() const { return 0; }
  // False for models whose outputs come from outside the process.
  virtual bool deterministic() const { return true; }

  int class_count() const { return class_count_; }
  double param_scale() const { return param_scale_; }
  const CostModel& cost_model() const { return cost_; }
  // Tokens emitted per prediction; feeds the normalized token cost.
  int output_tokens() const { return output_tokens_; }

 protected:
  StageModel(int class_count, CostModel cost, double param_scale, int output_tokens = 1);
  nlohmann::json common_json() const;

 private:
  int class_count_;
  CostModel cost_;
  double param_scale_;
  int output_tokens_;
};

struct Decision {
  bool escalate = false;  // g^i = 1
  double confidence = 0.0;
  double threshold = 0.0;
};

// g^i. Reads both the input and the stage output.
class DecisionModule {
 public:
  virtual ~DecisionModule() = default;

  virtual Decision decide(const TokenSeq& x, const StageOutput& y) const = 0;
  virtual double cost_of(const TokenSeq& x, const StageOutput& /*y*/) const {
    return cost_.cost(x.size());
  }
  virtual std::string kind() const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual std::size_t vocab_size() const { return 0; }

  double param_scale() const { return param_scale_; }
  const CostModel& cost_model() const { return cost_; }

 protected:
  DecisionModule(CostModel cost, double param_scale);
  nlohmann::json common_json() const;

 private:
  CostModel cost_;
  double param_scale_;
};

using StagePtr = std::shared_ptr<const StageModel>;
using DeciderPtr = std::shared_ptr<const DecisionModule>;

// Φ(·; F, G): l stage models and l-1 decision modules.
class CascadeSpec {
 public:
  static constexpr std::size_t kDefaultMaxLength = 4096;

  CascadeSpec(std::vector<StagePtr> stages, std::vector<DeciderPtr> deciders,
              std::size_t vocab_size, std::size_t max_sequence_length = kDefaultMaxLength);

  int stage_count() const { return static_cast<int>(stages_.size()); }
  // 1-based, matching f^i / g^i.
  const StageModel& stage(int i) const { return *stages_.at(static_cast<std::size_t>(i - 1)); }
  const DecisionModule& decider(int i) const { return *deciders_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<StagePtr>& stages() const { return stages_; }
  const std::vector<DeciderPtr>& deciders() const { return deciders_; }

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t max_sequence_length() const { return max_sequence_length_; }
  bool deterministic() const;

 private:
  std::vector<StagePtr> stages_;
  std::vector<DeciderPtr> deciders_;
  std::size_t vocab_size_;
  std::size_t max_sequence_length_;
};

struct StageRecord {
  int stage = 0;  // 1-based
  StageOutput output;
  std::optional<Decision> decision;  // nullopt marks the terminal stage l
  double model_cost = 0.0;
  double decider_cost = 0.0;  // c_g^l ≡ 0 for the terminal stage
  std::size_t input_tokens = 0;
  double model_scale = 0.0;
  double decider_scale = 0.0;
};

struct ExecutionTrace {
  std::vector<StageRecord> per_stage;
  int stage_count = 0;
  int stopping_index = 0;  // τ
  Label final_output;
  double total_cost = 0.0;
};

ExecutionTrace run_cascade(const CascadeSpec& spec, const TokenSeq& x);

// min{i | g^i = 0} over recorded decisions, else l.
int stopping_index(const ExecutionTrace& trace);

// Σ_{i≤τ} c_f^i + Σ_{i≤τ} c_g^i, summed left to right, model costs first.
double total_cost(const ExecutionTrace& trace, const CascadeSpec& spec);

}  // namespace cascade
