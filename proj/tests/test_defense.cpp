#include <gtest/gtest.h>

#include <cmath>

#include "cascade/defense/defense.hpp"
#include "cascade/errors.hpp"
#include "cascade/zoo/planted.hpp"
#include "support.hpp"

using namespace cascade;
using namespace cascade::defense;

TEST(Filters, TrimTailWords) {
  EXPECT_EQ(trim_tail_words("a  b c d", 2), "a b");
  EXPECT_EQ(trim_tail_words("a b", 5), "");
  EXPECT_EQ(trim_tail_words("a b", 0), "a b");
}

TEST(Filters, SpecialCharRatio) {
  EXPECT_DOUBLE_EQ(special_char_ratio(""), 0.0);
  EXPECT_DOUBLE_EQ(special_char_ratio("ab cd"), 0.0);
  EXPECT_DOUBLE_EQ(special_char_ratio("a!b?"), 0.5);
  EXPECT_DOUBLE_EQ(special_char_ratio("!! a"), 0.5);
}

TEST(Filters, RegexTriggersAboveRatioAndTrims) {
  FilterConfig c{FilterKind::regex, 0.2, 1};
  auto r = regex_filter("hello world", c);
  EXPECT_FALSE(r.triggered);
  EXPECT_EQ(r.text, "hello world");
  r = regex_filter("hello #$%&", c);
  EXPECT_TRUE(r.triggered);
  EXPECT_EQ(r.text, "hello");
  EXPECT_THROW(regex_filter("x", FilterConfig{FilterKind::regex, 1.5, 0}), ConfigError);
}

TEST(Filters, CharsPerTokenCountsSeparators) {
  const auto v = zoo::Vocabulary::with_specials({"ab", "abcdefgh"});
  EXPECT_DOUBLE_EQ(chars_per_token("ab ab", v), 2.5);
  EXPECT_DOUBLE_EQ(chars_per_token("", v), 0.0);
  FilterConfig c{FilterKind::cpt, 4.0, 1};
  EXPECT_FALSE(cpt_filter("ab ab", v, c).triggered);
  const auto r = cpt_filter("ab abcdefgh", v, c);
  EXPECT_TRUE(r.triggered);
  EXPECT_EQ(r.text, "ab");
}

TEST(Bigram, AddOneProbabilitiesByHand) {
  const std::vector<std::string> texts{"a b", "a c"};
  const auto m = BigramModel::fit(texts);
  EXPECT_EQ(m.type_count(), 3u);
  // P(a|<s>) = 3/7, P(b|a) = 2/7, P(</s>|b) = 2/6
  EXPECT_NEAR(m.log_prob("a b"), std::log(3.0 / 7 * 2.0 / 7 * 2.0 / 6), 1e-12);
  EXPECT_NEAR(m.perplexity("a b"), std::exp(-m.log_prob("a b") / 3.0), 1e-12);
  EXPECT_TRUE(std::isnan(m.perplexity("")));
  EXPECT_GT(m.perplexity("zz qq"), m.perplexity("a b"));
}

TEST(Filters, PplThresholdIsNearestRankQuantile) {
  std::vector<std::string> clean;
  for (int k = 0; k < 10; ++k) clean.push_back("w" + std::to_string(k % 3) + " w" + std::to_string(k % 5));
  auto model = std::make_shared<const BigramModel>(BigramModel::fit(clean));
  std::vector<double> ppl;
  for (const auto& t : clean) ppl.push_back(model->perplexity(t));
  std::sort(ppl.begin(), ppl.end());
  for (double q : {0.1, 0.35, 0.5, 0.9, 1.0}) {
    const auto f = TextFilter::ppl({FilterKind::ppl, q, 0}, model, clean);
    EXPECT_EQ(f.threshold(), ppl[static_cast<std::size_t>(std::ceil(q * 10)) - 1]);
  }
  const auto f = TextFilter::ppl({FilterKind::ppl, 1.0, 0}, model, clean);
  for (const auto& t : clean) EXPECT_FALSE(f.triggers(t));
  EXPECT_TRUE(f.triggers("qq zz yy xx"));
  EXPECT_THROW(TextFilter::ppl({FilterKind::ppl, 0.5, 0}, model, {}), ConfigError);
}

// Property: σ = 0 smoothing is the identity.
TEST(Smoothing, ZeroSigmaIsIdentity) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = fixture::random_instance(seed, 20);
    for (const auto& x : inst.inputs) {
      for (int i = 1; i <= inst.spec.stage_count(); ++i) {
        const auto a = smooth_predict(inst.spec.stage(i), x, {0.0, 3, seed});
        const auto b = inst.spec.stage(i).predict(x);
        ASSERT_EQ(a.prediction, b.prediction);
        ASSERT_EQ(a.scores, b.scores);
      }
    }
  }
}

TEST(Smoothing, DeterministicAndNoisy) {
  const auto inst = fixture::random_instance(5, 40);
  const SmoothingConfig cfg{2.0, 5, 11};
  int differs = 0;
  for (const auto& x : inst.inputs) {
    const auto a = smooth_predict(inst.spec.stage(1), x, cfg, 1);
    const auto b = smooth_predict(inst.spec.stage(1), x, cfg, 1);
    EXPECT_EQ(a.scores, b.scores);
    differs += a.scores != inst.spec.stage(1).predict(x).scores;
  }
  EXPECT_GT(differs, 0);
  EXPECT_THROW(SmoothingConfig({-1.0, 1, 0}).validate(), ConfigError);
  const auto s = smooth_cascade(inst.spec, cfg);
  EXPECT_EQ(s.stage_count(), inst.spec.stage_count());
  EXPECT_EQ(s.stage(1).kind(), "smoothed");
}

namespace {

std::vector<DefenseSample> marked_samples(const zoo::AttackableCascade& ac) {
  std::vector<DefenseSample> out;
  const TokenSeq tail{ac.attack_vocab[0], ac.attack_vocab[1], ac.attack_vocab[2], ac.attack_vocab[3]};
  for (const auto& s : ac.corpus.samples) {
    DefenseSample d{s.id, s.input, concat(s.input, tail), false};
    const auto c = run_cascade(ac.spec, d.clean_input), a = run_cascade(ac.spec, d.attacked_input);
    d.attack_succeeded = c.final_output != a.final_output || c.stopping_index != a.stopping_index;
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST(DefenseEval, FullTrimRestoresEveryAttack) {
  zoo::AttackableProfile p;
  p.corpus_size = 60;
  const auto ac = zoo::make_attackable_cascade(p, 2);
  const auto samples = marked_samples(ac);
  auto vocab = std::make_shared<const zoo::Vocabulary>(ac.vocab);

  Defense none;
  const auto o = defense_eval(samples, none, ac.spec);
  EXPECT_EQ(o.restored, 0u);
  EXPECT_EQ(o.clean_changed, 0u);
  EXPECT_EQ(o.odr, 0.0);

  // a tiny cpt threshold flags every text, and trim 4 strips the suffix exactly
  Defense all;
  all.vocab = vocab;
  all.filter = TextFilter::cpt({FilterKind::cpt, 1e-9, 4}, vocab);
  const auto r = defense_eval(samples, all, ac.spec, 4);
  EXPECT_EQ(r.restored, r.successful_attacks);
  EXPECT_EQ(r.attacked_triggered, r.successful_attacks);
  EXPECT_EQ(r.clean_triggered, samples.size());
  if (r.successful_attacks) {
    EXPECT_EQ(r.dsr, 1.0);
  }
}

TEST(DefenseEval, Validation) {
  std::vector<DefenseSample> dup{{1, {}, {}, false}, {1, {}, {}, false}};
  const auto inst = fixture::random_instance(0);
  EXPECT_THROW(defense_eval(dup, Defense{}, inst.spec), IntegrityError);

  std::vector<std::pair<int, TokenSeq>> clean{{0, {1}}, {1, {2}}}, adv{{1, {2, 3}}, {0, {1, 3}}};
  bool raw[] = {true, false};
  const auto paired = pair_samples(clean, adv, raw);
  ASSERT_EQ(paired.size(), 2u);
  EXPECT_EQ(paired[0].attacked_input, (TokenSeq{1, 3}));
  EXPECT_FALSE(paired[0].attack_succeeded);
  EXPECT_TRUE(paired[1].attack_succeeded);
  std::vector<std::pair<int, TokenSeq>> short_adv{{0, {1}}};
  bool one[] = {true};
  EXPECT_THROW(pair_samples(clean, short_adv, one), IntegrityError);
}

TEST(DefenseCsv, HeaderAndEmptyPassRate) {
  DefenseRow a{"single_acc", "ppl", 0.9, 8, std::nullopt, {}};
  a.outcome.dsr = 0.5;
  DefenseRow b{"joint_p0.40", "cpt", 4.5, 8, 0.4, {}};
  const auto csv = defense_csv({a, b});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "attack,kind,strength,trim,pass_rate,dsr,odr");
  EXPECT_NE(csv.find("single_acc,ppl,0.9,8,,0.5000"), std::string::npos);
  EXPECT_NE(csv.find("joint_p0.40,cpt,4.5,8,0.40,"), std::string::npos);
}
