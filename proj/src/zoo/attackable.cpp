#include <cmath>
#include <unordered_set>

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/zoo/models.hpp"
#include "cascade/zoo/planted.hpp"

namespace cascade::zoo {

namespace {

std::vector<std::string> make_attack_surfaces(std::size_t n, std::uint64_t seed) {
  static const char* kMarks[] = {"}}", "])", "==", "\\\\", "@@", "<<", "~~", "%%",
                                 "##", "^^", "!!", "::", "$(", ";;", "|>", "*/"};
  static const char* kStems[] = {"describing", "similarly", "opposite", "revert", "ignore",
                                 "sure", "now", "write", "oneliner", "please", "instead",
                                 "respond", "format", "dual", "surely", "tutorial"};
  Rng rng(seed);
  std::unordered_set<std::string> used;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string s = kMarks[rng.uniform_index(std::size(kMarks))];
    s += kStems[rng.uniform_index(std::size(kStems))];
    if (rng.bernoulli(0.5)) s += kMarks[rng.uniform_index(std::size(kMarks))];
    if (used.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

AttackableCascade make_attackable_cascade(const AttackableProfile& p, std::uint64_t seed) {
  const int l = p.stages;
  const auto c = static_cast<std::size_t>(p.class_count);
  if (l < 2) throw ConfigError("attackable cascade needs at least two stages");
  if (c < 2) throw ConfigError("attackable cascade needs at least two classes");
  for (const auto* v : {&p.signal, &p.noise, &p.attack_sensitivity}) {
    if (v->size() != static_cast<std::size_t>(l)) {
      throw ConfigError("attackable profile needs per-stage signal, noise and attack_sensitivity");
    }
  }
  if (p.content_words < c) throw ConfigError("attackable profile needs a content word per class");
  if (p.attack_tokens == 0) throw ConfigError("attackable profile needs attack tokens");

  const auto words = make_words(p.content_words, stream_key({seed, 11}));
  const auto attack = make_attack_surfaces(p.attack_tokens, stream_key({seed, 12}));
  std::vector<std::string> all = words;
  all.insert(all.end(), attack.begin(), attack.end());
  Vocabulary vocab = Vocabulary::with_specials(all);
  const std::size_t v = vocab.size();
  const auto first_word = static_cast<TokenId>(2);
  const auto first_attack = static_cast<TokenId>(2 + words.size());

  auto topic_of = [&](std::size_t word) { return word % c; };

  // Stage models.
  std::vector<std::vector<double>> attack_rows_f1;
  std::vector<StagePtr> stages;
  for (int j = 0; j < l; ++j) {
    Rng rng(stream_key({seed, 20, static_cast<std::uint64_t>(j)}));
    std::vector<double> w(v * c, 0.0);
    const auto sj = static_cast<std::size_t>(j);
    for (std::size_t k = 0; k < words.size(); ++k) {
      const std::size_t row = static_cast<std::size_t>(first_word) + k;
      for (std::size_t cls = 0; cls < c; ++cls) {
        w[row * c + cls] = p.noise[sj] * rng.normal() + (cls == topic_of(k) ? p.signal[sj] : 0.0);
      }
    }
    for (std::size_t k = 0; k < attack.size(); ++k) {
      const std::size_t row = static_cast<std::size_t>(first_attack) + k;
      for (std::size_t cls = 0; cls < c; ++cls) {
        w[row * c + cls] = p.attack_sensitivity[sj] * rng.normal();
      }
      if (j == 0) {
        attack_rows_f1.emplace_back(w.begin() + static_cast<std::ptrdiff_t>(row * c),
                                    w.begin() + static_cast<std::ptrdiff_t>((row + 1) * c));
      }
    }
    stages.push_back(std::make_shared<LinearBagModel>(
        v, p.class_count, std::move(w), std::vector<double>(c, 0.0),
        default_stage_cost(j + 1), default_stage_scale(j + 1), 1 + 4 * j));
  }

  // Deciders: content words are neutral, attack tokens shift confidence.
  std::vector<DeciderPtr> deciders;
  for (int j = 0; j + 1 < l; ++j) {
    Rng rng(stream_key({seed, 30, static_cast<std::uint64_t>(j)}));
    std::vector<double> w(v, 0.0);
    for (std::size_t k = 0; k < attack.size(); ++k) {
      const auto& r = attack_rows_f1[k];
      double spread = 0.0;
      for (double x : r) spread += x * x;
      spread = std::sqrt(spread / static_cast<double>(c));
      w[static_cast<std::size_t>(first_attack) + k] =
          p.decider_attack_scale * rng.normal() - p.decider_anomaly * spread;
    }
    deciders.push_back(std::make_shared<LinearDecider>(
        std::move(w), p.decider_bias, p.decider_threshold, p.decider_margin_weight,
        default_decider_cost(), default_decider_scale()));
  }

  // Corpus.
  Rng rng(stream_key({seed, 40}));
  SyntheticCorpus corpus;
  corpus.generator_seed = seed;
  std::vector<std::vector<std::size_t>> by_topic(c);
  for (std::size_t k = 0; k < words.size(); ++k) by_topic[topic_of(k)].push_back(k);
  for (std::size_t i = 0; i < p.corpus_size; ++i) {
    const std::size_t label = rng.uniform_index(c);
    TokenSeq x;
    for (std::size_t w = 0; w < p.words_per_sample; ++w) {
      std::size_t k;
      if (rng.bernoulli(p.topic_purity)) {
        k = by_topic[label][rng.uniform_index(by_topic[label].size())];
      } else {
        k = rng.uniform_index(words.size());
      }
      x.push_back(first_word + static_cast<TokenId>(k));
    }
    corpus.samples.push_back(Sample{static_cast<int>(i), std::move(x), Label::of_class(static_cast<int>(label))});
  }

  std::vector<TokenId> attack_vocab;
  for (std::size_t k = 0; k < attack.size(); ++k) attack_vocab.push_back(first_attack + static_cast<TokenId>(k));

  CascadeSpec spec(std::move(stages), std::move(deciders), v);
  return AttackableCascade{std::move(vocab), std::move(spec), std::move(corpus), std::move(attack_vocab)};
}

}  // namespace cascade::zoo
