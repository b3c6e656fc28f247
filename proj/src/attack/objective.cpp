#include <algorithm>
#include <cmath>
#include <limits>

#include "cascade/attack/attack.hpp"
#include "cascade/errors.hpp"

namespace cascade::attack {

std::string to_string(Phase p) { return p == Phase::f ? "f" : "g"; }

std::string to_string(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }

std::string to_string(Tier t) {
  switch (t) {
    case Tier::preserve: return "i";
    case Tier::keep_wrong: return "ii";
    case Tier::unconstrained: return "iii";
  }
  return "iii";
}

std::string to_string(AttackMode m) {
  switch (m) {
    case AttackMode::single_acc: return "single_acc";
    case AttackMode::single_cost: return "single_cost";
    case AttackMode::dm_flip: return "dm_flip";
    case AttackMode::joint: return "joint";
  }
  return "joint";
}

std::string to_string(Backend b) { return b == Backend::greedy ? "greedy" : "genetic"; }

std::string to_string(LossKind k) { return k == LossKind::margin ? "margin" : "cross_entropy"; }

AttackMode attack_mode_from_string(const std::string& s) {
  if (s == "single_acc") return AttackMode::single_acc;
  if (s == "single_cost") return AttackMode::single_cost;
  if (s == "dm_flip") return AttackMode::dm_flip;
  if (s == "joint") return AttackMode::joint;
  throw ConfigError("unknown attack mode '" + s + "'");
}

Backend backend_from_string(const std::string& s) {
  if (s == "greedy") return Backend::greedy;
  if (s == "genetic") return Backend::genetic;
  throw ConfigError("unknown attack backend '" + s + "'");
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "margin") return LossKind::margin;
  if (s == "cross_entropy") return LossKind::cross_entropy;
  throw ConfigError("unknown loss '" + s + "'");
}

void AttackConfig::validate() const {
  neighborhood.validate();
  if (target_stages.empty()) throw ConfigError("attack needs at least one target stage");
  if (iterations_per_phase == 0) throw ConfigError("iterations_per_phase must be positive");
  if (!(pass_rate >= 0.0 && pass_rate <= 1.0)) throw ConfigError("pass_rate must lie in [0, 1]");
}

void AttackConfig::validate_against(const CascadeSpec& spec) const {
  validate();
  for (int i : target_stages) {
    if (i < 1 || i >= spec.stage_count()) {
      throw ConfigError("target stage " + std::to_string(i) + " outside 1.." +
                        std::to_string(spec.stage_count() - 1));
    }
  }
  for (TokenId t : neighborhood.attack_vocab) {
    if (t < 0 || static_cast<std::size_t>(t) >= spec.vocab_size()) {
      throw ConfigError("attack token " + std::to_string(t) + " outside the cascade vocabulary");
    }
  }
}

double stage_loss(const std::vector<double>& scores, int y, LossKind kind) {
  const auto yi = static_cast<std::size_t>(y);
  if (y < 0 || yi >= scores.size()) throw ConfigError("label outside the stage's class range");
  if (kind == LossKind::margin) {
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < scores.size(); ++c) {
      if (c != yi) best_other = std::max(best_other, scores[c]);
    }
    if (scores.size() == 1) return -scores[yi];
    return best_other - scores[yi];
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  return -(scores[yi] - mx - std::log(z));
}

Objective::Objective(ObjectiveKind kind, std::vector<int> targets, LossKind loss,
                     std::vector<double> signs)
    : kind_(kind), targets_(std::move(targets)), loss_(loss), signs_(std::move(signs)) {
  if (targets_.empty()) throw ConfigError("objective needs at least one target stage");
  if (signs_.empty()) signs_.assign(targets_.size(), 1.0);
  if (signs_.size() != targets_.size()) throw ConfigError("objective signs must match targets");
}

ObjectiveValue Objective::evaluate(const CascadeSpec& spec, const TokenSeq& input,
                                   const Label& y) const {
  return evaluate_detailed(spec, input, y).value;
}

Evaluation Objective::evaluate_detailed(const CascadeSpec& spec, const TokenSeq& input,
                                        const Label& y) const {
  const int label = y.class_id();
  Evaluation ev;
  ev.predictions.reserve(targets_.size());
  for (std::size_t k = 0; k < targets_.size(); ++k) {
    const int i = targets_[k];
    const StageOutput out = spec.stage(i).predict(input);
    ev.predictions.push_back(out.prediction.class_id());
    const double sign = signs_[k];
    if (kind_ == ObjectiveKind::acc_loss) {
      ev.value.primary += sign * stage_loss(out.scores, label, loss_);
    } else {
      const Decision d = spec.decider(i).decide(input, out);
      ev.value.primary += sign * (d.escalate ? 1.0 : 0.0);
      ev.value.tiebreak += sign * (d.threshold - d.confidence);
    }
  }
  return ev;
}

}  // namespace cascade::attack
