#include <cmath>

#include "cascade/attack/attack.hpp"
#include "cascade/errors.hpp"

namespace cascade::attack {

bool satisfies_tier(const CandidateEval& c, std::span<const int> snapshot, int y, Tier tier) {
  if (c.predictions.size() != snapshot.size()) {
    throw IntegrityError("candidate predictions do not match the snapshot's stage count");
  }
  switch (tier) {
    case Tier::preserve:
      for (std::size_t k = 0; k < snapshot.size(); ++k) {
        if (c.predictions[k] != snapshot[k]) return false;
      }
      return true;
    case Tier::keep_wrong:
      for (std::size_t k = 0; k < snapshot.size(); ++k) {
        if (snapshot[k] != y && c.predictions[k] == y) return false;
      }
      return true;
    case Tier::unconstrained:
      return true;
  }
  return true;
}

Selection constrained_select(std::span<const CandidateEval> candidates,
                             std::span<const int> snapshot, int y, Direction direction) {
  if (candidates.empty()) throw ConfigError("constrained_select needs at least one candidate");
  for (Tier tier : {Tier::preserve, Tier::keep_wrong, Tier::unconstrained}) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (!satisfies_tier(candidates[k], snapshot, y, tier)) continue;
      if (!best) {
        best = k;
        continue;
      }
      const auto& v = candidates[k].cost;
      const auto& b = candidates[*best].cost;
      if (direction == Direction::maximize ? v > b : v < b) best = k;
    }
    if (best) return Selection{*best, tier};
  }
  return Selection{0, Tier::unconstrained};
}

Direction pass_rate_gate(double p, bool attack_succeeded, std::uint64_t seed, int sample_id,
                         int round) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("pass rate must lie in [0, 1]");
  if (!attack_succeeded) return Direction::maximize;
  Rng rng(stream_key({seed, 0x67617465ULL, static_cast<std::uint64_t>(sample_id),
                      static_cast<std::uint64_t>(round)}));
  return rng.uniform01() < p ? Direction::maximize : Direction::minimize;
}

}  // namespace cascade::attack
