#include "cascade/zoo/planted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/zoo/models.hpp"

namespace cascade::zoo {

namespace {

double margin_confidence(double margin, int classes) {
  std::vector<double> scores(static_cast<std::size_t>(classes), 0.0);
  scores[0] = margin;
  return softmax_margin(scores);
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

// Returns k if x·n is within 1e-9 of an integer k, else -1.
long long exact_count(double fraction, std::size_t n) {
  const double v = fraction * static_cast<double>(n);
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? static_cast<long long>(r) : -1;
}

}  // namespace

CostModel default_stage_cost(int stage) {
  const double f = std::pow(4.0, stage - 1);
  return CostModel{0.05 * f, 1.0 * f};
}

double default_stage_scale(int stage) { return 1.5 * std::pow(4.0, stage - 1); }

CostModel default_decider_cost() { return CostModel{0.01, 0.1}; }

double default_decider_scale() { return 0.1; }

CascadeSpec plant_cascade(std::span<const SamplePlan> plans, const PlantOptions& opts) {
  const int l = opts.stages;
  const int c = opts.class_count;
  if (l < 1) throw ConfigError("planted cascade needs at least one stage");
  if (c < 2) throw ConfigError("planted cascade needs at least two classes");
  if (opts.vocab_size == 0) throw ConfigError("planted cascade needs a vocabulary size");
  if (!(margin_confidence(opts.low_margin, c) < opts.threshold &&
        opts.threshold <= margin_confidence(opts.high_margin, c))) {
    throw ConfigError("low/high margins do not straddle the decider threshold");
  }

  std::vector<std::unordered_map<std::uint64_t, TableEntry>> tables(static_cast<std::size_t>(l));
  std::unordered_map<std::uint64_t, const SamplePlan*> seen;

  for (const SamplePlan& p : plans) {
    if (p.stop_stage < 1 || p.stop_stage > l) {
      throw ConstructionError("plan stop_stage " + std::to_string(p.stop_stage) +
                              " outside 1.." + std::to_string(l));
    }
    if (p.stage_correct.size() != static_cast<std::size_t>(l)) {
      throw ConstructionError("plan stage_correct needs one entry per stage");
    }
    if (p.label < 0 || p.label >= c) throw ConstructionError("plan label outside class range");
    const std::uint64_t key = p.input.hash();
    auto [it, inserted] = seen.emplace(key, &p);
    if (!inserted) {
      const SamplePlan& q = *it->second;
      if (q.input != p.input) throw ConstructionError("table key collision between plan inputs");
      if (q.label != p.label || q.stop_stage != p.stop_stage ||
          q.stage_correct != p.stage_correct) {
        throw ConstructionError("conflicting plans for the same input");
      }
      continue;
    }
    for (int j = 1; j <= l; ++j) {
      int predicted = p.label;
      if (!p.stage_correct[static_cast<std::size_t>(j - 1)]) {
        Rng rng(stream_key({opts.seed, key, static_cast<std::uint64_t>(j)}));
        predicted = (p.label + 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(c - 1)))) % c;
      }
      const double margin = j < p.stop_stage ? opts.low_margin : opts.high_margin;
      tables[static_cast<std::size_t>(j - 1)][key] = TableEntry{predicted, margin};
    }
  }

  auto pick_cost = [](const std::vector<CostModel>& v, int i, CostModel dflt) {
    return v.empty() ? dflt : v.at(static_cast<std::size_t>(i - 1));
  };
  auto pick_scale = [](const std::vector<double>& v, int i, double dflt) {
    return v.empty() ? dflt : v.at(static_cast<std::size_t>(i - 1));
  };

  std::vector<StagePtr> stages;
  for (int j = 1; j <= l; ++j) {
    stages.push_back(std::make_shared<TableModel>(
        c, std::move(tables[static_cast<std::size_t>(j - 1)]), TableEntry{0, 0.0},
        pick_cost(opts.stage_costs, j, default_stage_cost(j)),
        pick_scale(opts.stage_scales, j, default_stage_scale(j))));
  }
  std::vector<DeciderPtr> deciders;
  for (int j = 1; j < l; ++j) {
    deciders.push_back(std::make_shared<ThresholdDecider>(
        opts.threshold, pick_cost(opts.decider_costs, j, default_decider_cost()),
        pick_scale(opts.decider_scales, j, default_decider_scale())));
  }
  return CascadeSpec(std::move(stages), std::move(deciders), opts.vocab_size);
}

std::vector<std::string> make_words(std::size_t n, std::uint64_t seed) {
  static const char* kOnsets[] = {"b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "br", "st", "tr"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  static const char* kCodas[] = {"", "n", "r", "s", "l", "t"};
  Rng rng(seed);
  std::unordered_set<std::string> used;
  std::vector<std::string> words;
  while (words.size() < n) {
    std::string w;
    const std::size_t syllables = 2 + rng.uniform_index(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.uniform_index(std::size(kOnsets))];
      w += kVowels[rng.uniform_index(std::size(kVowels))];
    }
    w += kCodas[rng.uniform_index(std::size(kCodas))];
    if (used.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

PlantedCascade make_planted_cascade(const PlantedProfile& profile, std::uint64_t seed) {
  const int l = profile.stages;
  const std::size_t n = profile.corpus_size;
  if (l < 1) throw ConstructionError("profile needs at least one stage");
  if (profile.route_fractions.size() != static_cast<std::size_t>(l)) {
    throw ConstructionError("profile needs one route fraction per stage");
  }
  if (profile.accuracy.size() != static_cast<std::size_t>(l)) {
    throw ConstructionError("profile needs one accuracy row per routed subset");
  }

  std::vector<std::string> problems;
  std::vector<std::size_t> subset_size(static_cast<std::size_t>(l), 0);
  std::vector<std::vector<std::size_t>> correct(static_cast<std::size_t>(l));
  std::size_t total = 0;
  for (int i = 0; i < l; ++i) {
    const double frac = profile.route_fractions[static_cast<std::size_t>(i)];
    const long long k = exact_count(frac, n);
    if (frac < 0.0 || frac > 1.0 || k < 0) {
      std::ostringstream msg;
      msg << "route_fractions[" << i + 1 << "] = " << frac << " is " << frac * static_cast<double>(n)
          << " of " << n << " samples";
      problems.push_back(msg.str());
      continue;
    }
    subset_size[static_cast<std::size_t>(i)] = static_cast<std::size_t>(k);
    total += static_cast<std::size_t>(k);
    const auto& row = profile.accuracy[static_cast<std::size_t>(i)];
    if (row.size() != static_cast<std::size_t>(l)) {
      problems.push_back("accuracy row " + std::to_string(i + 1) + " needs one entry per stage");
      continue;
    }
    for (int j = 0; j < l; ++j) {
      const double acc = row[static_cast<std::size_t>(j)];
      const long long kc = exact_count(acc, static_cast<std::size_t>(k));
      if (acc < 0.0 || acc > 1.0 || kc < 0) {
        std::ostringstream msg;
        msg << "accuracy of stage " << j + 1 << " on S_" << i + 1 << " = " << acc << " is "
            << acc * static_cast<double>(k) << " of " << k << " samples";
        problems.push_back(msg.str());
        continue;
      }
      correct[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(kc));
    }
  }
  if (problems.empty() && total != n) {
    problems.push_back("route fractions cover " + std::to_string(total) + " of " +
                       std::to_string(n) + " samples");
  }
  if (!problems.empty()) {
    std::string msg = "infeasible planted profile:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConstructionError(msg);
  }

  Rng rng(stream_key({seed, 0x70616e74ULL}));
  const auto words = make_words(32, stream_key({seed, 1}));
  Vocabulary vocab = Vocabulary::with_specials(words);
  const auto first_word = static_cast<TokenId>(vocab.size() - words.size());

  // Unique inputs.
  std::vector<TokenSeq> inputs;
  std::unordered_set<std::uint64_t> keys;
  while (inputs.size() < n) {
    TokenSeq x;
    for (std::size_t w = 0; w < profile.words_per_sample; ++w) {
      x.push_back(first_word + static_cast<TokenId>(rng.uniform_index(words.size())));
    }
    if (keys.insert(x.hash()).second) inputs.push_back(std::move(x));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  std::vector<SamplePlan> plans(n);
  std::size_t cursor = 0;
  for (int i = 0; i < l; ++i) {
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                     order.begin() + static_cast<std::ptrdiff_t>(cursor + subset_size[static_cast<std::size_t>(i)]));
    cursor += subset_size[static_cast<std::size_t>(i)];
    for (std::size_t m : members) {
      plans[m].input = inputs[m];
      plans[m].label = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(profile.class_count)));
      plans[m].stop_stage = i + 1;
      plans[m].stage_correct.assign(static_cast<std::size_t>(l), false);
    }
    for (int j = 0; j < l; ++j) {
      auto pick = members;
      shuffle(pick, rng);
      const std::size_t k = correct[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      for (std::size_t t = 0; t < k; ++t) plans[pick[t]].stage_correct[static_cast<std::size_t>(j)] = true;
    }
  }

  PlantOptions opts;
  opts.stages = l;
  opts.class_count = profile.class_count;
  opts.vocab_size = vocab.size();
  opts.seed = stream_key({seed, 2});
  CascadeSpec spec = plant_cascade(plans, opts);

  SyntheticCorpus corpus;
  corpus.generator_seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    corpus.samples.push_back(Sample{static_cast<int>(i), plans[i].input, Label::of_class(plans[i].label)});
  }
  for (int j = 0; j < l; ++j) {
    std::size_t ok = 0;
    for (const auto& p : plans) ok += p.stage_correct[static_cast<std::size_t>(j)] ? 1 : 0;
    corpus.difficulty.push_back(n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0);
  }
  return PlantedCascade{std::move(vocab), std::move(spec), std::move(corpus), std::move(plans)};
}

}  // namespace cascade::zoo
