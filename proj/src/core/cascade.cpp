#include "cascade/cascade.hpp"

#include <string>

#include "cascade/errors.hpp"

namespace cascade {

std::size_t argmax(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

StageOutput StageOutput::from_scores(std::vector<double> scores, int output_token_count) {
  if (scores.empty()) throw StageError("stage produced an empty score vector");
  if (output_token_count < 1) throw StageError("output_token_count must be >= 1");
  StageOutput out;
  out.prediction = Label::of_class(static_cast<int>(argmax(scores)));
  out.scores = std::move(scores);
  out.output_token_count = output_token_count;
  return out;
}

StageModel::StageModel(int class_count, CostModel cost, double param_scale, int output_tokens)
    : class_count_(class_count), cost_(cost), param_scale_(param_scale), output_tokens_(output_tokens) {
  if (class_count_ < 1) throw ConfigError("stage model class_count must be >= 1");
  if (output_tokens_ < 1) throw ConfigError("stage model output_tokens must be >= 1");
  if (cost_.per_token < 0.0 || cost_.fixed < 0.0) {
    throw ConfigError("stage model cost coefficients must be non-negative");
  }
  if (!(param_scale_ >= 0.0)) throw ConfigError("stage model param_scale must be non-negative");
}

nlohmann::json StageModel::common_json() const {
  return {{"kind", kind()},
          {"class_count", class_count_},
          {"cost", {{"per_token", cost_.per_token}, {"fixed", cost_.fixed}}},
          {"param_scale", param_scale_},
          {"output_tokens", output_tokens_}};
}

DecisionModule::DecisionModule(CostModel cost, double param_scale)
    : cost_(cost), param_scale_(param_scale) {
  if (cost_.per_token < 0.0 || cost_.fixed < 0.0) {
    throw ConfigError("decider cost coefficients must be non-negative");
  }
  if (!(param_scale_ >= 0.0)) throw ConfigError("decider param_scale must be non-negative");
}

nlohmann::json DecisionModule::common_json() const {
  return {{"kind", kind()},
          {"cost", {{"per_token", cost_.per_token}, {"fixed", cost_.fixed}}},
          {"param_scale", param_scale_}};
}

CascadeSpec::CascadeSpec(std::vector<StagePtr> stages, std::vector<DeciderPtr> deciders,
                         std::size_t vocab_size, std::size_t max_sequence_length)
    : stages_(std::move(stages)),
      deciders_(std::move(deciders)),
      vocab_size_(vocab_size),
      max_sequence_length_(max_sequence_length) {
  if (stages_.empty()) throw ConfigError("cascade has no stages");
  if (deciders_.size() + 1 != stages_.size()) {
    throw ConfigError("cascade with " + std::to_string(stages_.size()) + " stages needs " +
                      std::to_string(stages_.size() - 1) + " deciders, got " +
                      std::to_string(deciders_.size()));
  }
  if (vocab_size_ == 0) throw ConfigError("cascade vocabulary size must be positive");
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (!stages_[i]) throw ConfigError("stage " + std::to_string(i + 1) + " is null");
    std::size_t v = stages_[i]->vocab_size();
    if (v != 0 && v != vocab_size_) {
      throw ConfigError("stage " + std::to_string(i + 1) + " was built for a vocabulary of size " +
                        std::to_string(v) + ", cascade vocabulary has " +
                        std::to_string(vocab_size_));
    }
  }
  for (std::size_t i = 0; i < deciders_.size(); ++i) {
    if (!deciders_[i]) throw ConfigError("decider " + std::to_string(i + 1) + " is null");
    std::size_t v = deciders_[i]->vocab_size();
    if (v != 0 && v != vocab_size_) {
      throw ConfigError("decider " + std::to_string(i + 1) +
                        " was built for a vocabulary of size " + std::to_string(v) +
                        ", cascade vocabulary has " + std::to_string(vocab_size_));
    }
  }
}

bool CascadeSpec::deterministic() const {
  for (const auto& s : stages_) {
    if (!s->deterministic()) return false;
  }
  return true;
}

ExecutionTrace run_cascade(const CascadeSpec& spec, const TokenSeq& x) {
  x.validate(spec.vocab_size(), spec.max_sequence_length());
  const int l = spec.stage_count();

  ExecutionTrace trace;
  trace.stage_count = l;
  for (int i = 1; i <= l; ++i) {
    const StageModel& f = spec.stage(i);
    StageRecord rec;
    rec.stage = i;
    rec.output = f.predict(x);
    rec.model_cost = f.cost_of(x);
    rec.model_scale = f.param_scale();
    rec.input_tokens = x.size();
    const bool terminal = (i == l);
    if (!terminal) {
      const DecisionModule& g = spec.decider(i);
      rec.decision = g.decide(x, rec.output);
      rec.decider_cost = g.cost_of(x, rec.output);
      rec.decider_scale = g.param_scale();
    }
    const bool stop = terminal || !rec.decision->escalate;
    trace.per_stage.push_back(std::move(rec));
    if (stop) break;
  }
  trace.stopping_index = stopping_index(trace);
  trace.final_output = trace.per_stage.back().output.prediction;
  trace.total_cost = total_cost(trace, spec);
  return trace;
}

int stopping_index(const ExecutionTrace& trace) {
  for (const auto& rec : trace.per_stage) {
    if (rec.decision && !rec.decision->escalate) return rec.stage;
  }
  return trace.stage_count;
}

double total_cost(const ExecutionTrace& trace, const CascadeSpec& spec) {
  if (trace.stage_count != spec.stage_count()) {
    throw IntegrityError("trace has " + std::to_string(trace.stage_count) +
                         " stages but the cascade has " + std::to_string(spec.stage_count()));
  }
  if (trace.per_stage.empty() ||
      trace.per_stage.size() > static_cast<std::size_t>(spec.stage_count())) {
    throw IntegrityError("trace records " + std::to_string(trace.per_stage.size()) +
                         " stages for a cascade of " + std::to_string(spec.stage_count()));
  }
  double model_sum = 0.0;
  for (const auto& rec : trace.per_stage) model_sum += rec.model_cost;
  double decider_sum = 0.0;
  for (const auto& rec : trace.per_stage) decider_sum += rec.decider_cost;
  return model_sum + decider_sum;
}

}  // namespace cascade
