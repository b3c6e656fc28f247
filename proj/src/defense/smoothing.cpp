#include "cascade/defense/defense.hpp"
#include "cascade/errors.hpp"
#include "cascade/rng.hpp"

namespace cascade::defense {

StageOutput smooth_predict(const StageModel& model, const TokenSeq& x, const SmoothingConfig& cfg,
                           std::uint64_t salt) {
  cfg.validate();
  StageOutput base = model.predict(x);
  if (cfg.sigma == 0.0) return base;
  const std::size_t c = base.scores.size();
  Rng rng(stream_key({cfg.seed, salt, x.hash(), x.size()}));
  std::vector<std::size_t> votes(c, 0);
  std::vector<double> mean(c, 0.0);
  std::vector<double> noisy(c);
  for (std::size_t d = 0; d < cfg.n_draws; ++d) {
    for (std::size_t k = 0; k < c; ++k) {
      noisy[k] = base.scores[k] + cfg.sigma * rng.normal();
      mean[k] += noisy[k];
    }
    ++votes[argmax(noisy)];
  }
  std::size_t winner = 0;
  for (std::size_t k = 1; k < c; ++k) {
    if (votes[k] > votes[winner]) winner = k;
  }
  for (auto& m : mean) m /= static_cast<double>(cfg.n_draws);
  StageOutput out;
  out.prediction = Label::of_class(static_cast<int>(winner));
  out.scores = std::move(mean);
  out.output_token_count = base.output_token_count;
  return out;
}

SmoothedStageModel::SmoothedStageModel(StagePtr inner, SmoothingConfig cfg, std::uint64_t salt)
    : StageModel(inner ? inner->class_count() : 1, inner ? inner->cost_model() : CostModel{},
                 inner ? inner->param_scale() : 0.0, inner ? inner->output_tokens() : 1),
      inner_(std::move(inner)),
      cfg_(cfg),
      salt_(salt) {
  if (!inner_) throw ConfigError("smoothed stage needs an inner model");
  cfg_.validate();
}

StageOutput SmoothedStageModel::predict(const TokenSeq& x) const {
  return smooth_predict(*inner_, x, cfg_, salt_);
}

nlohmann::json SmoothedStageModel::to_json() const {
  return nlohmann::json{{"kind", "smoothed"},
                        {"sigma", cfg_.sigma},
                        {"n_draws", cfg_.n_draws},
                        {"seed", cfg_.seed},
                        {"inner", inner_->to_json()}};
}

CascadeSpec smooth_cascade(const CascadeSpec& spec, const SmoothingConfig& cfg) {
  std::vector<StagePtr> stages;
  for (int i = 1; i <= spec.stage_count(); ++i) {
    stages.push_back(std::make_shared<SmoothedStageModel>(spec.stages()[static_cast<std::size_t>(i - 1)],
                                                          cfg, static_cast<std::uint64_t>(i)));
  }
  return CascadeSpec(std::move(stages), spec.deciders(), spec.vocab_size(), spec.max_sequence_length());
}

}  // namespace cascade::defense
