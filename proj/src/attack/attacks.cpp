#include "cascade/attack/attack.hpp"
#include "cascade/errors.hpp"

namespace cascade::attack {

namespace {

constexpr std::uint64_t kSingleTag = 0x73696e67ULL;
constexpr std::uint64_t kFTag = 0x66ULL;
constexpr std::uint64_t kGTag = 0x67ULL;

TokenSeq random_segment(const Neighborhood& nb, std::size_t length, Rng& rng) {
  TokenSeq s;
  for (std::size_t i = 0; i < length; ++i) {
    s.push_back(nb.attack_vocab[rng.uniform_index(nb.attack_vocab.size())]);
  }
  return s;
}

void check_inputs(const TokenSeq& x, const Label& y, const CascadeSpec& spec,
                  const AttackConfig& cfg) {
  cfg.validate_against(spec);
  if (!y.is_class()) throw ConfigError("suffix attacks need class labels");
  if (y.class_id() < 0 || y.class_id() >= spec.stage(1).class_count()) {
    throw ConfigError("label outside the cascade's class range");
  }
  x.validate(spec.vocab_size(), spec.max_sequence_length());
  const std::size_t total = x.size() + cfg.neighborhood.total_length();
  if (total > spec.max_sequence_length()) {
    throw ConfigError("attacked input would exceed the maximum sequence length");
  }
}

std::vector<int> predictions_at(const CascadeSpec& spec, const std::vector<int>& targets,
                                const TokenSeq& input) {
  std::vector<int> out;
  out.reserve(targets.size());
  for (int i : targets) out.push_back(spec.stage(i).predict(input).prediction.class_id());
  return out;
}

bool better(const ObjectiveValue& a, const ObjectiveValue& b, Direction d) {
  return d == Direction::maximize ? a > b : a < b;
}

}  // namespace

AttackResult single_target_attack(const TokenSeq& x, const Label& y, const CascadeSpec& spec,
                                  const AttackConfig& cfg, int sample_id) {
  if (cfg.mode == AttackMode::joint) throw ConfigError("single_target_attack needs a single-target mode");
  check_inputs(x, y, spec, cfg);
  const auto& targets = cfg.target_stages;

  std::optional<Objective> objective;
  switch (cfg.mode) {
    case AttackMode::single_acc:
      objective.emplace(ObjectiveKind::acc_loss, targets, cfg.loss);
      break;
    case AttackMode::single_cost:
      objective.emplace(ObjectiveKind::cost_escalation, targets, cfg.loss);
      break;
    case AttackMode::dm_flip: {
      // Escalate where the stage is right, stop where it is wrong.
      std::vector<double> signs;
      for (int p : predictions_at(spec, targets, x)) signs.push_back(p == y.class_id() ? 1.0 : -1.0);
      objective.emplace(ObjectiveKind::cost_escalation, targets, cfg.loss, std::move(signs));
      break;
    }
    case AttackMode::joint:
      break;
  }

  const Neighborhood& nb = cfg.neighborhood;
  Rng rng(stream_key({cfg.seed, kSingleTag, static_cast<std::uint64_t>(sample_id)}));
  const TokenSeq init = random_segment(nb, nb.total_length(), rng);
  const std::size_t budget = 2 * nb.rounds * cfg.iterations_per_phase;
  PhaseResult res = update_operator(init, *objective, spec, x, y, nb, budget, cfg.backend,
                                    Direction::maximize, rng);

  AttackResult out;
  out.report.sample_id = sample_id;
  out.report.mode = cfg.mode;
  PhaseLog log;
  log.phase = "single";
  log.round = 1;
  log.before = res.trajectory.front();
  log.after = res.trajectory.back();
  log.direction = Direction::maximize;
  log.trajectory = std::move(res.trajectory);
  out.report.per_round.push_back(std::move(log));
  out.report.suffix.append(Phase::f, 1, res.segment);
  out.adversarial = concat(x, out.report.suffix.assembled());
  return out;
}

AttackResult joint_attack(const TokenSeq& x, const Label& y, const CascadeSpec& spec,
                          const AttackConfig& cfg, int sample_id) {
  if (cfg.mode != AttackMode::joint) throw ConfigError("joint_attack needs mode joint");
  check_inputs(x, y, spec, cfg);
  const auto& targets = cfg.target_stages;
  const Neighborhood& nb = cfg.neighborhood;
  const int label = y.class_id();
  const auto sid = static_cast<std::uint64_t>(sample_id);
  const Objective acc(ObjectiveKind::acc_loss, targets, cfg.loss);
  const Objective cost(ObjectiveKind::cost_escalation, targets, cfg.loss);

  AttackResult out;
  out.report.sample_id = sample_id;
  out.report.mode = AttackMode::joint;
  SuffixState& suffix = out.report.suffix;

  for (std::size_t r = 1; r <= nb.rounds; ++r) {
    const int round = static_cast<int>(r);

    // Phase 1: degrade the targeted predictions.
    {
      Rng rng(stream_key({cfg.seed, kFTag, sid, r}));
      const TokenSeq context = concat(x, suffix.assembled());
      const TokenSeq init = random_segment(nb, nb.suffix_slots_per_phase, rng);
      PhaseResult res = update_operator(init, acc, spec, context, y, nb, cfg.iterations_per_phase,
                                        cfg.backend, Direction::maximize, rng);
      PhaseLog log;
      log.phase = "f";
      log.round = round;
      log.before = res.trajectory.front();
      log.after = res.trajectory.back();
      log.direction = Direction::maximize;
      log.trajectory = std::move(res.trajectory);
      out.report.per_round.push_back(std::move(log));
      suffix.append(Phase::f, round, std::move(res.segment));
    }

    // Snapshot ŷ^i_r after phase 1.
    const TokenSeq context = concat(x, suffix.assembled());
    const std::vector<int> snapshot = predictions_at(spec, targets, context);
    bool succeeded = true;
    for (int p : snapshot) succeeded = succeeded && p != label;
    const Direction direction = pass_rate_gate(cfg.pass_rate, succeeded, cfg.seed, sample_id, round);

    // Phase 2: steer escalation under the tier constraints, restarting when
    // only unconstrained candidates remain.
    auto evaluate = [&](const TokenSeq& segment) {
      Evaluation ev;
      try {
        ev = cost.evaluate_detailed(spec, concat(context, segment), y);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        std::string toks;
        for (TokenId t : segment) toks += (toks.empty() ? "" : ",") + std::to_string(t);
        throw AttackError("objective evaluation failed on candidate [" + toks + "]: " + e.what());
      }
      return CandidateEval{segment, ev.value, std::move(ev.predictions)};
    };

    std::optional<CandidateEval> best;
    PhaseLog log;
    int restarts = 0;
    for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
      Rng rng(stream_key({cfg.seed, kGTag, sid, r, static_cast<std::uint64_t>(attempt)}));
      CandidateEval current = evaluate(random_segment(nb, nb.suffix_slots_per_phase, rng));
      std::vector<ObjectiveValue> trajectory{current.cost};
      Tier tier = Tier::unconstrained;
      for (std::size_t t = 0; t < cfg.iterations_per_phase; ++t) {
        const auto cands = propose_candidates(current.segment, nb, rng);
        std::vector<CandidateEval> evals;
        evals.reserve(cands.size());
        for (const auto& c : cands) evals.push_back(evaluate(c));
        const Selection sel = constrained_select(evals, snapshot, label, direction);
        current = std::move(evals[sel.index]);
        tier = sel.tier;
        trajectory.push_back(current.cost);
      }
      if (!best || better(current.cost, best->cost, direction) || tier != Tier::unconstrained) {
        best = current;
        log.before = trajectory.front();
        log.trajectory = trajectory;
        log.tier = tier;
      }
      restarts = attempt;
      if (tier != Tier::unconstrained) break;
    }
    log.phase = "g";
    log.round = round;
    log.after = best->cost;
    log.direction = direction;
    log.restarts = restarts;
    out.report.per_round.push_back(std::move(log));
    suffix.append(Phase::g, round, std::move(best->segment));
  }

  out.adversarial = concat(x, suffix.assembled());
  return out;
}

AttackResult run_attack(const TokenSeq& x, const Label& y, const CascadeSpec& spec,
                        const AttackConfig& cfg, int sample_id) {
  return cfg.mode == AttackMode::joint ? joint_attack(x, y, spec, cfg, sample_id)
                                       : single_target_attack(x, y, spec, cfg, sample_id);
}

}  // namespace cascade::attack
