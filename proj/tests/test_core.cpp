#include <gtest/gtest.h>

#include <set>

#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"
#include "cascade/rng.hpp"
#include "cascade/trace_io.hpp"
#include "cascade/zoo/models.hpp"
#include "support.hpp"

using namespace cascade;

TEST(TokenSeq, ConcatPrefixAndHash) {
  TokenSeq a{1, 2, 3}, b{4};
  EXPECT_EQ(concat(a, b), (TokenSeq{1, 2, 3, 4}));
  EXPECT_EQ(a.prefix(2), (TokenSeq{1, 2}));
  EXPECT_EQ(a.prefix(10), a);
  EXPECT_EQ(a.hash(), TokenSeq({1, 2, 3}).hash());
  EXPECT_NE(a.hash(), TokenSeq({3, 2, 1}).hash());
  EXPECT_NE(TokenSeq{}.hash(), TokenSeq({0}).hash());
}

TEST(TokenSeq, ValidateRejectsBadIdsAndLength) {
  EXPECT_NO_THROW(TokenSeq({0, 4}).validate(5, 2));
  EXPECT_THROW(TokenSeq({5}).validate(5, 10), ConfigError);
  EXPECT_THROW(TokenSeq({-1}).validate(5, 10), ConfigError);
  EXPECT_THROW(TokenSeq({1, 1, 1}).validate(5, 2), ConfigError);
}

TEST(Label, ClassAndAnswerAccessors) {
  const Label c = Label::of_class(3);
  EXPECT_TRUE(c.is_class());
  EXPECT_EQ(c.class_id(), 3);
  const Label a = Label::of_answer(TokenSeq{7, 8});
  EXPECT_FALSE(a.is_class());
  EXPECT_EQ(a.answer(), (TokenSeq{7, 8}));
  EXPECT_NE(c, a);
}

TEST(Rng, StreamKeysAreOrderSensitiveAndReproducible) {
  EXPECT_EQ(stream_key({1, 2, 3}), stream_key({1, 2, 3}));
  EXPECT_NE(stream_key({1, 2, 3}), stream_key({3, 2, 1}));
  EXPECT_NE(stream_key({1, 2}), stream_key({1, 2, 0}));
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, UniformHelpersStayInRange) {
  Rng r(7);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    ASSERT_LT(r.uniform_index(7), 7u);
  }
  EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Argmax, LowestIndexWinsTies) {
  EXPECT_EQ(argmax({1.0, 3.0, 3.0}), 1u);
  EXPECT_EQ(argmax({2.0, 2.0}), 0u);
  const auto o = StageOutput::from_scores({0.0, 5.0, 5.0});
  EXPECT_EQ(o.prediction.class_id(), 1);
}

TEST(CascadeSpec, RejectsWrongDeciderCount) {
  auto f = std::make_shared<zoo::TableModel>(2, std::unordered_map<std::uint64_t, zoo::TableEntry>{},
                                             zoo::TableEntry{0, 1.0});
  EXPECT_THROW(CascadeSpec({f, f}, {}, 4), ConfigError);
  EXPECT_THROW(CascadeSpec({}, {}, 4), ConfigError);
  EXPECT_NO_THROW(CascadeSpec({f}, {}, 4));
}

// Property: run_cascade agrees with the eager oracle on stopping index,
// output, recorded predictions and cost.
TEST(CascadeProperty, MatchesStraightLineOracle) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto inst = fixture::random_instance(seed);
    for (const auto& x : inst.inputs) {
      const auto t = run_cascade(inst.spec, x);
      const auto o = fixture::oracle_run(inst.spec, x);
      ASSERT_EQ(t.stopping_index, o.tau) << "seed " << seed;
      ASSERT_EQ(t.final_output, o.final_output);
      ASSERT_EQ(static_cast<int>(t.per_stage.size()), o.tau);
      for (const auto& rec : t.per_stage) {
        ASSERT_EQ(rec.output.prediction.class_id(), o.predictions[static_cast<std::size_t>(rec.stage - 1)]);
        ASSERT_EQ(rec.decision.has_value(), rec.stage < inst.spec.stage_count());
      }
      ASSERT_EQ(t.total_cost, o.cost);
      ASSERT_EQ(total_cost(t, inst.spec), t.total_cost);
      ASSERT_EQ(stopping_index(t), t.stopping_index);
    }
  }
}

TEST(CascadeProperty, TerminalStageHasNoDeciderCost) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = fixture::random_instance(seed);
    for (const auto& x : inst.inputs) {
      const auto t = run_cascade(inst.spec, x);
      if (t.stopping_index == t.stage_count) {
        EXPECT_EQ(t.per_stage.back().decider_cost, 0.0);
        EXPECT_FALSE(t.per_stage.back().decision.has_value());
      }
    }
  }
}

TEST(Cascade, RejectsOutOfVocabularyInput) {
  const auto inst = fixture::random_instance(3);
  TokenSeq bad{static_cast<TokenId>(inst.spec.vocab_size())};
  EXPECT_THROW(run_cascade(inst.spec, bad), ConfigError);
}

TEST(Cascade, TotalCostRejectsForeignTrace) {
  auto a = fixture::random_instance(1);
  ExecutionTrace t = run_cascade(a.spec, a.inputs[0]);
  t.stage_count += 1;
  EXPECT_THROW(total_cost(t, a.spec), IntegrityError);
}

TEST(TraceIo, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = fixture::random_instance(seed);
    const auto t = run_cascade(inst.spec, inst.inputs[0]);
    const auto back = trace_from_json(nlohmann::json::parse(trace_to_json(t, 5).dump()));
    EXPECT_EQ(back.stopping_index, t.stopping_index);
    EXPECT_EQ(back.final_output, t.final_output);
    EXPECT_EQ(back.total_cost, t.total_cost);
    ASSERT_EQ(back.per_stage.size(), t.per_stage.size());
    for (std::size_t i = 0; i < t.per_stage.size(); ++i) {
      EXPECT_EQ(back.per_stage[i].model_cost, t.per_stage[i].model_cost);
      EXPECT_EQ(back.per_stage[i].output.scores, t.per_stage[i].output.scores);
      EXPECT_EQ(back.per_stage[i].decision.has_value(), t.per_stage[i].decision.has_value());
    }
  }
}

TEST(TraceIo, LabelsRoundTrip) {
  EXPECT_EQ(label_from_json(label_to_json(Label::of_class(2))), Label::of_class(2));
  const Label a = Label::of_answer(TokenSeq{3, 4});
  EXPECT_EQ(label_from_json(label_to_json(a)), a);
}

TEST(ParallelMap, OrderIndependentOfWorkers) {
  auto sq = [](std::size_t i) { return i * i; };
  const auto one = parallel_map(1000, 1, sq);
  const auto many = parallel_map(1000, 8, sq);
  EXPECT_EQ(one, many);
  EXPECT_TRUE(parallel_map(0, 4, sq).empty());
}

TEST(ParallelMap, RethrowsLowestFailingIndex) {
  auto fn = [](std::size_t i) -> int {
    if (i == 17 || i == 90) throw std::runtime_error(std::to_string(i));
    return 0;
  };
  try {
    parallel_map(100, 8, fn);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}
