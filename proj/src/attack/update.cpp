#include <algorithm>
#include <unordered_map>

#include "cascade/attack/attack.hpp"
#include "cascade/errors.hpp"

namespace cascade::attack {

namespace {

std::string describe(const TokenSeq& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

ObjectiveValue checked_score(const SegmentScorer& score, const TokenSeq& segment) {
  try {
    return score(segment);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw AttackError("objective evaluation failed on candidate " + describe(segment) + ": " +
                      e.what());
  }
}

PhaseResult greedy(const TokenSeq& incumbent, const SegmentScorer& score, const Neighborhood& nb,
                   std::size_t budget, Rng& rng) {
  PhaseResult res{incumbent, {}};
  ObjectiveValue current = checked_score(score, incumbent);
  res.trajectory.push_back(current);
  for (std::size_t it = 0; it < budget; ++it) {
    const auto cands = propose_candidates(res.segment, nb, rng);
    std::size_t best = 0;
    ObjectiveValue best_value = current;
    // cands[0] is the incumbent and keeps its value; only strict gains move.
    for (std::size_t k = 1; k < cands.size(); ++k) {
      const ObjectiveValue v = checked_score(score, cands[k]);
      if (v > best_value) {
        best = k;
        best_value = v;
      }
    }
    if (best != 0) {
      res.segment = cands[best];
      current = best_value;
    }
    res.trajectory.push_back(current);
  }
  return res;
}

// Elitist evolution over segments: tournament parents, uniform crossover,
// per-position mutation. The best segment seen is returned, so the result
// never scores below the incumbent.
PhaseResult genetic(const TokenSeq& incumbent, const SegmentScorer& score, const Neighborhood& nb,
                    std::size_t budget, Rng& rng) {
  std::unordered_map<TokenSeq, ObjectiveValue, TokenSeqHash> cache;
  auto eval = [&](const TokenSeq& s) {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    const ObjectiveValue v = checked_score(score, s);
    cache.emplace(s, v);
    return v;
  };

  PhaseResult res{incumbent, {}};
  ObjectiveValue best = eval(incumbent);
  res.trajectory.push_back(best);

  std::vector<TokenSeq> population = propose_candidates(incumbent, nb, rng);
  const std::size_t size = std::max<std::size_t>(population.size(), 2);
  const std::size_t elites = std::max<std::size_t>(1, size / 8);
  const std::size_t len = incumbent.size();

  for (std::size_t gen = 0; gen < budget; ++gen) {
    std::vector<ObjectiveValue> fitness;
    fitness.reserve(population.size());
    for (const auto& s : population) {
      fitness.push_back(eval(s));
      if (fitness.back() > best) {
        best = fitness.back();
        res.segment = s;
      }
    }
    res.trajectory.push_back(best);
    if (gen + 1 == budget || len == 0) continue;

    std::vector<std::size_t> order(population.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

    auto tournament = [&]() {
      const std::size_t a = rng.uniform_index(population.size());
      const std::size_t b = rng.uniform_index(population.size());
      return fitness[b] > fitness[a] ? b : a;
    };

    std::vector<TokenSeq> next;
    next.reserve(size);
    for (std::size_t e = 0; e < elites && e < order.size(); ++e) next.push_back(population[order[e]]);
    while (next.size() < size) {
      const TokenSeq& pa = population[tournament()];
      const TokenSeq& pb = population[tournament()];
      TokenSeq child = pa;
      for (std::size_t i = 0; i < len; ++i) {
        if (rng.bernoulli(0.5)) child[i] = pb[i];
        if (rng.uniform_index(len) == 0) {
          child[i] = nb.attack_vocab[rng.uniform_index(nb.attack_vocab.size())];
        }
      }
      next.push_back(std::move(child));
    }
    population = std::move(next);
  }
  return res;
}

}  // namespace

PhaseResult update_operator(const TokenSeq& incumbent, const SegmentScorer& score,
                            const Neighborhood& nb, std::size_t budget, Backend backend,
                            Rng& rng) {
  if (budget == 0) throw ConfigError("update_operator budget must be at least 1");
  return backend == Backend::greedy ? greedy(incumbent, score, nb, budget, rng)
                                    : genetic(incumbent, score, nb, budget, rng);
}

PhaseResult update_operator(const TokenSeq& incumbent, const Objective& objective,
                            const CascadeSpec& spec, const TokenSeq& context, const Label& y,
                            const Neighborhood& nb, std::size_t budget, Backend backend,
                            Direction direction, Rng& rng) {
  const SegmentScorer score = [&](const TokenSeq& segment) {
    const ObjectiveValue v = objective.evaluate(spec, concat(context, segment), y);
    return direction == Direction::maximize ? v : v.negated();
  };
  PhaseResult res = update_operator(incumbent, score, nb, budget, backend, rng);
  if (direction == Direction::minimize) {
    for (auto& v : res.trajectory) v = v.negated();
  }
  return res;
}

}  // namespace cascade::attack
