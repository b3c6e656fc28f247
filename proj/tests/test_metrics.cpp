#include <gtest/gtest.h>

#include "cascade/errors.hpp"
#include "cascade/metrics/metrics.hpp"
#include "cascade/trace_io.hpp"
#include "support.hpp"

using namespace cascade;
using namespace cascade::metrics;

namespace {

ExecutionTrace one_stage_trace(std::size_t in, int out, double scale) {
  ExecutionTrace t;
  t.stage_count = 1;
  t.stopping_index = 1;
  StageRecord r;
  r.stage = 1;
  r.input_tokens = in;
  r.output.output_token_count = out;
  r.model_scale = scale;
  t.per_stage.push_back(r);
  return t;
}

}  // namespace

TEST(Answers, NormalizeAndMatch) {
  EXPECT_EQ(normalize_answer("  The  Cat!! "), "the cat");
  EXPECT_TRUE(exact_match("Paris.", "paris"));
  EXPECT_FALSE(exact_match("Paris", "London"));
  const auto v = zoo::Vocabulary::with_specials({"Paris", "paris!"});
  EXPECT_TRUE(same_answer(Label::of_answer(TokenSeq{2}), Label::of_answer(TokenSeq{3}), &v));
  EXPECT_FALSE(same_answer(Label::of_answer(TokenSeq{2}), Label::of_answer(TokenSeq{3})));
  EXPECT_FALSE(same_answer(Label::of_class(0), Label::of_answer(TokenSeq{})));
}

TEST(Accuracy, CountsMatchesAndValidates) {
  std::vector<Label> p{Label::of_class(1), Label::of_class(2), Label::of_class(1)};
  std::vector<Label> y{Label::of_class(1), Label::of_class(1), Label::of_class(1)};
  EXPECT_DOUBLE_EQ(accuracy(p, y), 2.0 / 3.0);
  EXPECT_THROW(accuracy({}, {}), IntegrityError);
  EXPECT_THROW(accuracy(std::span(p).first(2), y), IntegrityError);
}

TEST(Coverage, FractionOfConcepts) {
  const auto c = full_coverage("The dog chased a Ball", {"dog", "ball", "cat"});
  EXPECT_DOUBLE_EQ(c.fraction, 2.0 / 3.0);
  EXPECT_FALSE(c.full);
  EXPECT_TRUE(full_coverage("dog ball", {"ball", "dog"}).full);
  EXPECT_THROW(full_coverage("x", {}), ConfigError);
}

TEST(TokenCost, HandComputedFixture) {
  EXPECT_EQ(normalized_token_cost(one_stage_trace(100, 50, 3.0), 100), 0.075);
  EXPECT_THROW(normalized_token_cost(one_stage_trace(1, 1, 1.0), 0), ConfigError);
}

TEST(TokenCost, DeciderReadsInputAndOutput) {
  auto t = one_stage_trace(10, 2, 1.0);
  t.stage_count = 2;
  t.per_stage[0].decision = Decision{false, 0.9, 0.5};
  t.per_stage[0].decider_scale = 0.5;
  // model (0.1 + 0.06)·1 + decider (0.01·12 + 0.03)·0.5 = 0.235, over 10
  EXPECT_NEAR(normalized_token_cost(t, 10), 0.0235, 1e-15);
}

TEST(TokenCost, JsonFormAgrees) {
  const auto inst = fixture::random_instance(4);
  for (const auto& x : inst.inputs) {
    const auto t = run_cascade(inst.spec, x);
    EXPECT_EQ(normalized_token_cost(trace_to_json(t, 0), x.size()), normalized_token_cost(t, x.size()));
  }
  EXPECT_THROW(normalized_token_cost(nlohmann::json::object(), 3), IntegrityError);
}

TEST(PassRate, BoundaryFractions) {
  const std::vector<int> stops{1, 2, 3, 3};
  EXPECT_EQ(pass_rate(stops, 3), (std::vector<double>{0.75, 0.5}));
  EXPECT_THROW(pass_rate(std::vector<int>{}, 2), IntegrityError);
}

// Property: pass rates never increase along the cascade.
TEST(PassRate, MonotoneOnRandomTraces) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = fixture::random_instance(seed, 20);
    std::vector<ExecutionTrace> traces;
    for (const auto& x : inst.inputs) traces.push_back(run_cascade(inst.spec, x));
    const auto rho = pass_rate(traces);
    ASSERT_EQ(rho.size(), static_cast<std::size_t>(inst.spec.stage_count() - 1));
    for (std::size_t i = 1; i < rho.size(); ++i) ASSERT_LE(rho[i], rho[i - 1]);
  }
}

TEST(Report, ConfusionAndRoundTrip) {
  const auto inst = fixture::random_instance(6, 40);
  std::vector<ExecutionTrace> traces;
  std::vector<std::size_t> lens;
  for (const auto& x : inst.inputs) {
    traces.push_back(run_cascade(inst.spec, x));
    lens.push_back(x.size());
  }
  const auto r = metric_report(traces, inst.labels, lens);
  EXPECT_EQ(r.n, 40u);
  std::int64_t reached = 0;
  for (const auto& t : traces) reached += t.per_stage[0].decision.has_value();
  if (!r.dm_confusion.empty()) {
    EXPECT_EQ(r.dm_confusion[0].total(), reached);
  }
  const auto back = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
  EXPECT_EQ(back.task_metric, r.task_metric);
  EXPECT_EQ(back.pass_rates, r.pass_rates);
  EXPECT_EQ(back.dm_confusion.size(), r.dm_confusion.size());
  EXPECT_THROW(report_from_json(nlohmann::json::object()), IntegrityError);
}

TEST(Report, MarkdownColumns) {
  MetricReport a;
  a.task_metric = 0.5;
  a.pass_rates = {0.25};
  const auto md = render_markdown({{"clean", a}});
  EXPECT_NE(md.find("| Setting | Performance | Token cost | Time cost | Passrate_1 |"), std::string::npos);
  EXPECT_NE(md.find("| clean | 0.5000 |"), std::string::npos);
}
