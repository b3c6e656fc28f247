#include <algorithm>
#include <set>
#include <unordered_set>

#include "cascade/attack/attack.hpp"
#include "cascade/errors.hpp"

namespace cascade::attack {

namespace {

constexpr std::uint64_t kCountCap = std::uint64_t{1} << 62;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return std::min(kCountCap, a + b); }

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kCountCap / b) return kCountCap;
  return std::min(kCountCap, a * b);
}

bool in_vocab(const std::vector<TokenId>& vocab, TokenId t) {
  return std::find(vocab.begin(), vocab.end(), t) != vocab.end();
}

void enumerate(const TokenSeq& incumbent, const std::vector<TokenId>& vocab, std::size_t pos,
               std::size_t remaining, TokenSeq& current, std::vector<TokenSeq>& out) {
  if (pos == incumbent.size()) {
    out.push_back(current);
    return;
  }
  enumerate(incumbent, vocab, pos + 1, remaining, current, out);
  if (remaining == 0) return;
  const TokenId keep = incumbent[pos];
  for (TokenId t : vocab) {
    if (t == keep) continue;
    current[pos] = t;
    enumerate(incumbent, vocab, pos + 1, remaining - 1, current, out);
  }
  current[pos] = keep;
}

}  // namespace

void Neighborhood::validate() const {
  if (suffix_slots_per_phase == 0) throw ConfigError("suffix_slots_per_phase must be positive");
  if (rounds == 0) throw ConfigError("rounds must be positive");
  if (candidate_pool_size == 0) throw ConfigError("candidate_pool_size must be positive");
  if (attack_vocab.empty()) throw ConfigError("attack_vocab is empty");
  std::set<TokenId> unique(attack_vocab.begin(), attack_vocab.end());
  if (unique.size() != attack_vocab.size()) throw ConfigError("attack_vocab contains duplicates");
}

void SuffixState::append(Phase phase, int round, TokenSeq tokens) {
  assembled_.append(tokens);
  segments_.push_back(SuffixSegment{phase, round, std::move(tokens)});
}

std::uint64_t reachable_count(const TokenSeq& incumbent, const Neighborhood& nb) {
  const std::size_t s = std::min(nb.substitutions_per_iteration, incumbent.size());
  std::vector<std::uint64_t> dp(s + 1, 0);
  dp[0] = 1;
  for (TokenId t : incumbent) {
    const std::uint64_t alt =
        nb.attack_vocab.size() - (in_vocab(nb.attack_vocab, t) ? 1 : 0);
    for (std::size_t k = s; k >= 1; --k) dp[k] = sat_add(dp[k], sat_mul(dp[k - 1], alt));
  }
  std::uint64_t total = 0;
  for (auto v : dp) total = sat_add(total, v);
  return total;
}

std::vector<TokenSeq> propose_candidates(const TokenSeq& incumbent, const Neighborhood& nb,
                                         Rng& rng) {
  if (nb.attack_vocab.empty()) throw ConfigError("attack_vocab is empty");
  if (nb.candidate_pool_size == 0) throw ConfigError("candidate_pool_size must be positive");
  const std::size_t s = std::min(nb.substitutions_per_iteration, incumbent.size());
  const std::size_t pool = nb.candidate_pool_size;
  if (s == 0 || pool == 1) return {incumbent};

  const std::uint64_t reach = reachable_count(incumbent, nb);
  if (reach <= 8 * static_cast<std::uint64_t>(pool)) {
    std::vector<TokenSeq> all;
    TokenSeq scratch = incumbent;
    enumerate(incumbent, nb.attack_vocab, 0, s, scratch, all);
    // all[0] is the incumbent.
    if (all.size() <= pool) return all;
    for (std::size_t i = all.size() - 1; i > 1; --i) {
      std::swap(all[i], all[1 + rng.uniform_index(i)]);
    }
    all.resize(pool);
    return all;
  }

  std::vector<TokenSeq> out{incumbent};
  std::unordered_set<TokenSeq, TokenSeqHash> seen{incumbent};
  std::vector<std::size_t> positions(incumbent.size());
  const std::size_t max_attempts = 100 * pool;
  for (std::size_t attempt = 0; out.size() < pool && attempt < max_attempts; ++attempt) {
    const std::size_t k = 1 + rng.uniform_index(s);
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    TokenSeq cand = incumbent;
    bool changed = true;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(positions[i], positions[i + rng.uniform_index(positions.size() - i)]);
      const std::size_t p = positions[i];
      const TokenId t = nb.attack_vocab[rng.uniform_index(nb.attack_vocab.size())];
      if (t == incumbent[p]) {
        changed = false;
        break;
      }
      cand[p] = t;
    }
    if (!changed) continue;
    if (seen.insert(cand).second) out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace cascade::attack
