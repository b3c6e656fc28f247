#pragma once

// Shared fixtures and independent oracles for the test suites and the
// acceptance binary.

#include <cstdint>
#include <vector>

#include "cascade/attack/attack.hpp"
#include "cascade/cascade.hpp"
#include "cascade/runner/config.hpp"

namespace cascade::fixture {

struct RandomInstance {
  CascadeSpec spec;
  std::vector<TokenSeq> inputs;
  std::vector<Label> labels;
};

// 1..4 stages of random LinearBagModels, mixed Threshold/Linear deciders,
// random costs and scales, a handful of random inputs.
RandomInstance random_instance(std::uint64_t seed, std::size_t inputs = 5);

// Straight-line reference: every stage and decider is evaluated eagerly, then
// τ is read off the decision vector.
struct OracleRun {
  int tau = 0;
  Label final_output;
  std::vector<int> predictions;  // f^i(x) for all i
  std::vector<bool> escalate;    // g^i(x) for i < l
  double cost = 0.0;
};
OracleRun oracle_run(const CascadeSpec& spec, const TokenSeq& x);

// Re-sums the trace against the spec's cost models: c_f^i for i ≤ τ, then
// c_g^i for i ≤ min(τ, l-1), left to right.
double oracle_cost(const CascadeSpec& spec, const TokenSeq& x, int tau);

// Tiny two-stage linear cascade with a small attack alphabet for exhaustive
// search.
struct MicroInstance {
  CascadeSpec spec;
  TokenSeq x;
  Label y;
  attack::Neighborhood nb;
  std::size_t segment_length = 1;
};
MicroInstance micro_instance(std::uint64_t seed);

// All |attack_vocab|^len segments, lexicographic.
std::vector<TokenSeq> all_segments(const std::vector<TokenId>& alphabet, std::size_t len);

// Experiment config on the attackable generator used by the shape checks.
runner::ExperimentConfig attackable_config(std::uint64_t seed, bool with_defense);

inline constexpr std::uint64_t kAcceptanceSeed = 20240611;

}  // namespace cascade::fixture
