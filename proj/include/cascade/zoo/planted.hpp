#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cascade/cascade.hpp"
#include "cascade/zoo/corpus.hpp"
#include "cascade/zoo/vocabulary.hpp"

namespace cascade::zoo {

// Per-sample routing and correctness plan. stage_correct has one entry per
// stage, including stages the cascade never reaches for this sample (they
// still matter for standalone evaluation of f^l).
struct SamplePlan {
  TokenSeq input;
  int label = 0;
  int stop_stage = 1;
  std::vector<bool> stage_correct;
};

struct PlantOptions {
  int stages = 2;
  int class_count = 4;
  std::size_t vocab_size = 0;
  double threshold = 0.5;
  double low_margin = 0.1;   // confidence below threshold: escalate
  double high_margin = 6.0;  // confidence above threshold: stop
  std::uint64_t seed = 0;
  // Empty vectors select default_stage_cost / default_decider_cost.
  std::vector<CostModel> stage_costs;
  std::vector<double> stage_scales;
  std::vector<CostModel> decider_costs;
  std::vector<double> decider_scales;
};

// Stage i (1-based) gets progressively more expensive: the last stage plays
// the role of the large model.
CostModel default_stage_cost(int stage);
double default_stage_scale(int stage);
CostModel default_decider_cost();
double default_decider_scale();

// Table-backed cascade realising every plan exactly under ThresholdDeciders.
// Plans sharing an input must agree.
CascadeSpec plant_cascade(std::span<const SamplePlan> plans, const PlantOptions& opts);

struct PlantedProfile {
  int stages = 2;
  int class_count = 4;
  std::size_t corpus_size = 200;
  std::size_t words_per_sample = 6;
  std::vector<double> route_fractions;        // Pr[S_i], one per stage
  std::vector<std::vector<double>> accuracy;  // [subset i][stage j]: accuracy of f^j on S_i
};

struct PlantedCascade {
  Vocabulary vocab;
  CascadeSpec spec;
  SyntheticCorpus corpus;
  std::vector<SamplePlan> plans;
};

// Builds a corpus and a cascade whose routing fractions and per-subset stage
// accuracies equal the profile exactly. Throws ConstructionError listing
// every target that is not an integer count on the corpus.
PlantedCascade make_planted_cascade(const PlantedProfile& profile, std::uint64_t seed);

// Pseudo-words used as clean corpus vocabulary.
std::vector<std::string> make_words(std::size_t n, std::uint64_t seed);

struct AttackableProfile {
  std::size_t corpus_size = 200;
  int class_count = 4;
  int stages = 2;
  std::size_t words_per_sample = 10;
  std::size_t content_words = 48;
  std::size_t attack_tokens = 24;
  double topic_purity = 0.6;
  // Per stage, weak to strong.
  std::vector<double> signal = {0.9, 1.6};
  std::vector<double> noise = {0.9, 0.25};
  std::vector<double> attack_sensitivity = {2.0, 0.6};
  double decider_bias = -1.0;
  double decider_margin_weight = 4.0;
  double decider_threshold = 0.5;
  double decider_attack_scale = 1.5;
  // Couples decider weights to how hard an attack token pushes f^1, so the
  // decider grows suspicious of the tokens that damage the first stage.
  double decider_anomaly = 0.4;
};

struct AttackableCascade {
  Vocabulary vocab;
  CascadeSpec spec;
  SyntheticCorpus corpus;
  std::vector<TokenId> attack_vocab;
};

// Topic-classification cascade of LinearBagModels with LinearDeciders. The
// suffix-token weights make early stages sensitive and the last stage robust.
AttackableCascade make_attackable_cascade(const AttackableProfile& profile, std::uint64_t seed);

}  // namespace cascade::zoo
