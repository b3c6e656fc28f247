#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/cascade.hpp"
#include "cascade/rng.hpp"

namespace cascade::attack {

// N_ε(x): a suffix of 2·R·slots tokens drawn from attack_vocab, explored by
// local substitutions.
struct Neighborhood {
  std::size_t suffix_slots_per_phase = 2;
  std::size_t rounds = 2;
  std::size_t candidate_pool_size = 32;
  std::size_t substitutions_per_iteration = 2;
  std::vector<TokenId> attack_vocab;

  std::size_t total_length() const { return 2 * rounds * suffix_slots_per_phase; }
  void validate() const;
};

enum class Phase { f, g };
enum class Direction { maximize, minimize };
enum class Tier { preserve, keep_wrong, unconstrained };  // (i), (ii), (iii)
enum class AttackMode { single_acc, single_cost, dm_flip, joint };
enum class Backend { greedy, genetic };
enum class LossKind { margin, cross_entropy };

std::string to_string(Phase p);
std::string to_string(Direction d);
std::string to_string(Tier t);  // "i", "ii", "iii"
std::string to_string(AttackMode m);
std::string to_string(Backend b);
std::string to_string(LossKind k);
AttackMode attack_mode_from_string(const std::string& s);
Backend backend_from_string(const std::string& s);
LossKind loss_kind_from_string(const std::string& s);

struct SuffixSegment {
  Phase phase = Phase::f;
  int round = 1;
  TokenSeq tokens;
};

// δ^(f)_1 ∥ δ^(g)_1 ∥ … ∥ δ^(f)_R ∥ δ^(g)_R, kept both as segments and assembled.
class SuffixState {
 public:
  void append(Phase phase, int round, TokenSeq tokens);
  const std::vector<SuffixSegment>& segments() const { return segments_; }
  const TokenSeq& assembled() const { return assembled_; }

 private:
  std::vector<SuffixSegment> segments_;
  TokenSeq assembled_;
};

struct AttackConfig {
  AttackMode mode = AttackMode::joint;
  std::vector<int> target_stages{1};  // I ⊆ {1..l-1}
  Neighborhood neighborhood;
  std::size_t iterations_per_phase = 10;  // T
  double pass_rate = 1.0;                 // p, joint mode only
  std::uint64_t seed = 0;
  Backend backend = Backend::greedy;
  LossKind loss = LossKind::margin;

  void validate() const;
  void validate_against(const CascadeSpec& spec) const;
};

// Objectives compare lexicographically: primary is the attack objective,
// tiebreak a continuous surrogate used only within equal primary values.
struct ObjectiveValue {
  double primary = 0.0;
  double tiebreak = 0.0;

  ObjectiveValue negated() const { return {-primary, -tiebreak}; }
  friend auto operator<=>(const ObjectiveValue&, const ObjectiveValue&) = default;
};

enum class ObjectiveKind { acc_loss, cost_escalation };

struct Evaluation {
  ObjectiveValue value;
  std::vector<int> predictions;  // f^i(input) for each targeted stage, in target order
};

// L_acc = Σ_{i∈I} Loss(f^i(input), y), or L_cost = Σ_{i∈I} g^i(input, f^i(input)).
// `signs` (one per target, default +1) weights each stage's term; DM-flip uses
// it to push escalation up on correct stages and down on wrong ones.
class Objective {
 public:
  Objective(ObjectiveKind kind, std::vector<int> targets, LossKind loss = LossKind::margin,
            std::vector<double> signs = {});

  ObjectiveValue evaluate(const CascadeSpec& spec, const TokenSeq& input, const Label& y) const;
  Evaluation evaluate_detailed(const CascadeSpec& spec, const TokenSeq& input,
                               const Label& y) const;

  ObjectiveKind kind() const { return kind_; }
  const std::vector<int>& targets() const { return targets_; }

 private:
  ObjectiveKind kind_;
  std::vector<int> targets_;
  LossKind loss_;
  std::vector<double> signs_;
};

// Margin loss max_{c≠y} s_c − s_y, or −log softmax(s)_y.
double stage_loss(const std::vector<double>& scores, int y, LossKind kind);

// Pool of distinct segments within Hamming distance substitutions_per_iteration
// of the incumbent, incumbent first. Size is min(pool, #reachable segments).
std::vector<TokenSeq> propose_candidates(const TokenSeq& incumbent, const Neighborhood& nb,
                                         Rng& rng);

// Number of distinct segments within the substitution radius (capped).
std::uint64_t reachable_count(const TokenSeq& incumbent, const Neighborhood& nb);

using SegmentScorer = std::function<ObjectiveValue(const TokenSeq& segment)>;

struct PhaseResult {
  TokenSeq segment;
  std::vector<ObjectiveValue> trajectory;  // [initial, after iteration 1, ..., after T]
};

// Gray-box improvement operator: `budget` iterations of best-of-pool search
// (greedy) or elitist evolution (genetic). Never returns a segment scoring
// below the incumbent.
PhaseResult update_operator(const TokenSeq& incumbent, const SegmentScorer& score,
                            const Neighborhood& nb, std::size_t budget, Backend backend,
                            Rng& rng);

// Convenience form scoring context ∥ segment with an objective.
PhaseResult update_operator(const TokenSeq& incumbent, const Objective& objective,
                            const CascadeSpec& spec, const TokenSeq& context, const Label& y,
                            const Neighborhood& nb, std::size_t budget, Backend backend,
                            Direction direction, Rng& rng);

struct CandidateEval {
  TokenSeq segment;
  ObjectiveValue cost;           // L_cost (un-negated)
  std::vector<int> predictions;  // per targeted stage
};

struct Selection {
  std::size_t index = 0;
  Tier tier = Tier::unconstrained;
};

// Tiered choice: (i) predictions equal the snapshot, else (ii) snapshot-wrong
// stages stay wrong, else (iii) anything. Within the tier, best L_cost in the
// given direction; ties go to the lowest index.
Selection constrained_select(std::span<const CandidateEval> candidates,
                             std::span<const int> snapshot, int y, Direction direction);

bool satisfies_tier(const CandidateEval& c, std::span<const int> snapshot, int y, Tier tier);

// Samples that have not yet succeeded always escalate; successful ones
// escalate with probability p. Keyed by (seed, sample_id, round).
Direction pass_rate_gate(double p, bool attack_succeeded, std::uint64_t seed, int sample_id,
                         int round);

struct PhaseLog {
  std::string phase;  // "f", "g" or "single"
  int round = 1;
  ObjectiveValue before;
  ObjectiveValue after;
  std::optional<Tier> tier;
  Direction direction = Direction::maximize;
  int restarts = 0;
  std::vector<ObjectiveValue> trajectory;
};

struct AttackReport {
  int sample_id = 0;
  AttackMode mode = AttackMode::joint;
  std::vector<PhaseLog> per_round;
  SuffixState suffix;
};

struct AttackResult {
  TokenSeq adversarial;  // x ∥ δ
  AttackReport report;
};

AttackResult single_target_attack(const TokenSeq& x, const Label& y, const CascadeSpec& spec,
                                  const AttackConfig& cfg, int sample_id);

AttackResult joint_attack(const TokenSeq& x, const Label& y, const CascadeSpec& spec,
                          const AttackConfig& cfg, int sample_id);

// Dispatches on cfg.mode.
AttackResult run_attack(const TokenSeq& x, const Label& y, const CascadeSpec& spec,
                        const AttackConfig& cfg, int sample_id);

inline constexpr int kMaxRestarts = 3;

}  // namespace cascade::attack
