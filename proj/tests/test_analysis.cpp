#include <gtest/gtest.h>

#include <limits>

#include "cascade/analysis/analysis.hpp"
#include "cascade/errors.hpp"
#include "cascade/zoo/planted.hpp"
#include "support.hpp"

using namespace cascade;
using namespace cascade::analysis;

namespace {

std::vector<RoutingRecord> planted_records(std::vector<double> route, std::vector<std::vector<double>> acc,
                                           std::size_t n = 200, std::uint64_t seed = 1) {
  zoo::PlantedProfile p;
  p.stages = static_cast<int>(route.size());
  p.corpus_size = n;
  p.route_fractions = std::move(route);
  p.accuracy = std::move(acc);
  const auto pc = zoo::make_planted_cascade(p, seed);
  return routing_stats(pc.corpus.samples, pc.spec);
}

RoutingRecord rec(int id, int stop, std::vector<bool> correct, bool final_ok, int l = 2) {
  RoutingRecord r;
  r.sample_id = id;
  r.stage_count = l;
  r.stop_stage = stop;
  r.stage_correct = std::move(correct);
  r.final_stage_correct = final_ok;
  return r;
}

}  // namespace

TEST(Rational, ArithmeticInLowestTerms) {
  const Rational a(1, 2), b(1, 3);
  EXPECT_EQ(a + b, Rational(5, 6));
  EXPECT_EQ(a - b, Rational(1, 6));
  EXPECT_EQ(a * b, Rational(1, 6));
  EXPECT_EQ(a / b, Rational(3, 2));
  EXPECT_EQ(Rational(2, -4), Rational(-1, 2));
  EXPECT_EQ(Rational(6, 3).to_string(), "2");
  EXPECT_EQ(Rational(-3, 9).to_string(), "-1/3");
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_THROW(Rational(1, 0), IntegrityError);
  EXPECT_THROW(a / Rational(0), IntegrityError);
  EXPECT_EQ(ratio(3, 0), Rational(0));
}

TEST(Rational, OverflowIsReported) {
  const Rational big(std::numeric_limits<std::int64_t>::max(), 1);
  EXPECT_THROW(big + big, IntegrityError);
  EXPECT_THROW(big * Rational(2), IntegrityError);
  // 128-bit intermediates keep this exact.
  EXPECT_EQ(Rational(std::numeric_limits<std::int64_t>::max(), 3) * Rational(3, std::numeric_limits<std::int64_t>::max()),
            Rational(1));
}

TEST(RoutingRecord, FromTrace) {
  const auto inst = fixture::random_instance(8);
  const auto t = run_cascade(inst.spec, inst.inputs[0]);
  const auto r = routing_record(t, 4, inst.labels[0], inst.labels[0]);
  EXPECT_EQ(r.sample_id, 4);
  EXPECT_EQ(r.stop_stage, t.stopping_index);
  EXPECT_EQ(r.stage_correct.size(), static_cast<std::size_t>(t.stopping_index));
  EXPECT_TRUE(r.final_stage_correct);
  EXPECT_EQ(routing_record_from_json(routing_record_to_json(r)), r);
}

TEST(Decomposition, PlantedGapIsExact) {
  const auto d = decomposition(planted_records({0.5, 0.5}, {{0.6, 0.9}, {0.9, 0.9}}));
  EXPECT_EQ(d.gap, Rational(3, 20));
  EXPECT_TRUE(d.partition_holds());
  EXPECT_TRUE(d.decomposition_holds());
  EXPECT_TRUE(d.standalone_holds());
  EXPECT_TRUE(d.gap_identity_holds());
  const auto inv = decomposition(planted_records({0.5, 0.5}, {{0.9, 0.6}, {0.9, 0.9}}));
  EXPECT_EQ(inv.gap, Rational(-3, 20));
}

// Property: identities hold on arbitrary record sets.
TEST(Decomposition, IdentitiesOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = fixture::random_instance(seed, 30);
    std::vector<zoo::Sample> samples;
    for (std::size_t k = 0; k < inst.inputs.size(); ++k) {
      samples.push_back({static_cast<int>(k), inst.inputs[k], inst.labels[k]});
    }
    const auto d = decomposition(routing_stats(samples, inst.spec));
    ASSERT_TRUE(d.partition_holds());
    ASSERT_TRUE(d.decomposition_holds());
    ASSERT_TRUE(d.standalone_holds());
    ASSERT_TRUE(d.gap_identity_holds());
  }
}

TEST(Decomposition, ThreeStagePlanted) {
  const auto d = decomposition(planted_records({0.25, 0.25, 0.5}, {{0.5, 0.75, 1.0}, {0.0, 0.5, 0.75}, {0.5, 0.5, 0.5}}, 400));
  // 0.25·(0.5 − 0) + 0.25·(0.5 − 0.25) = 3/16
  EXPECT_EQ(d.gap, Rational(3, 16));
  EXPECT_TRUE(d.decomposition_holds());
}

TEST(Decomposition, RejectsInconsistentRecords) {
  EXPECT_THROW(decomposition({}), IntegrityError);
  std::vector<RoutingRecord> r{rec(0, 1, {true}, true), rec(1, 2, {true}, true)};
  EXPECT_THROW(decomposition(r), IntegrityError);
  r = {rec(0, 2, {true, false}, true)};
  EXPECT_THROW(decomposition(r), IntegrityError);
  r = {rec(0, 1, {true}, true), rec(1, 1, {true}, true, 3)};
  EXPECT_THROW(decomposition(r), IntegrityError);
}

TEST(GapShift, RoutingOnlyFixture) {
  const auto clean = planted_records({0.5, 0.5}, {{0.6, 0.9}, {0.9, 0.9}});
  const auto adv = planted_records({0.8, 0.2}, {{0.6, 0.9}, {0.9, 0.9}});
  const auto g = gap_shift(clean, adv);
  EXPECT_TRUE(g.attribution_holds());
  EXPECT_EQ(g.conditional_total(), Rational(0));
  EXPECT_EQ(g.cross_total(), Rational(0));
  EXPECT_EQ(g.routing_total(), Rational(9, 100));
}

TEST(GapShift, ConditionalOnlyFixture) {
  const auto clean = planted_records({0.5, 0.5}, {{0.6, 0.9}, {0.9, 0.9}});
  const auto adv = planted_records({0.5, 0.5}, {{0.2, 0.9}, {0.9, 0.9}});
  const auto g = gap_shift(clean, adv);
  EXPECT_TRUE(g.attribution_holds());
  EXPECT_EQ(g.routing_total(), Rational(0));
  EXPECT_EQ(g.cross_total(), Rational(0));
  EXPECT_EQ(g.conditional_total(), Rational(1, 5));
}

TEST(GapShift, MixedShiftStillAttributesExactly) {
  const auto clean = planted_records({0.5, 0.5}, {{0.6, 0.9}, {0.9, 0.9}});
  const auto adv = planted_records({0.75, 0.25}, {{0.2, 0.8}, {0.6, 0.8}});
  const auto g = gap_shift(clean, adv);
  EXPECT_TRUE(g.attribution_holds());
  EXPECT_NE(g.cross_total(), Rational(0));
  EXPECT_EQ(g.delta_change, g.delta_adv - g.delta_clean);
}

TEST(GapShift, RequiresMatchingIds) {
  std::vector<RoutingRecord> a{rec(0, 1, {true}, true), rec(1, 1, {false}, true)};
  std::vector<RoutingRecord> b{rec(0, 1, {true}, true), rec(2, 1, {false}, true)};
  EXPECT_THROW(gap_shift(a, b), IntegrityError);
  std::vector<RoutingRecord> c{rec(0, 1, {true}, true)};
  EXPECT_THROW(gap_shift(a, c), IntegrityError);
  std::vector<RoutingRecord> dup{rec(0, 1, {true}, true), rec(0, 1, {true}, true)};
  EXPECT_THROW(gap_shift(dup, dup), IntegrityError);
}

TEST(AnalysisJson, ExactValuesSerialised) {
  const auto d = decomposition(planted_records({0.5, 0.5}, {{0.6, 0.9}, {0.9, 0.9}}));
  const auto j = decomposition_to_json(d);
  EXPECT_EQ(j.at("gap").at("exact"), "3/20");
  EXPECT_DOUBLE_EQ(j.at("gap").at("value").get<double>(), 0.15);
  EXPECT_TRUE(j.at("identities").at("gap").get<bool>());
  EXPECT_NE(render_decomposition(d).find("gap = 0.1500"), std::string::npos);
}
