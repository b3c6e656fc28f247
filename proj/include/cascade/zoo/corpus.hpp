#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cascade/token_seq.hpp"
#include "cascade/zoo/vocabulary.hpp"

namespace cascade::zoo {

struct Sample {
  int id = 0;
  TokenSeq input;
  Label label;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct SyntheticCorpus {
  std::vector<Sample> samples;
  std::uint64_t generator_seed = 0;
  // Intended per-stage accuracy, informational.
  std::vector<double> difficulty;

  std::size_t size() const { return samples.size(); }
  friend bool operator==(const SyntheticCorpus&, const SyntheticCorpus&) = default;
};

// JSONL with one {"text", "label"} object per line; label is an integer class
// id or an answer string. Sample ids are line numbers.
void write_corpus_jsonl(const std::filesystem::path& path, const SyntheticCorpus& corpus,
                        const Vocabulary& vocab);
SyntheticCorpus read_corpus_jsonl(const std::filesystem::path& path, const Vocabulary& vocab);

// Uniform i.i.d. draw of `length` tokens from `pool`.
TokenSeq random_suffix(std::span<const TokenId> pool, std::size_t length, std::uint64_t seed);

}  // namespace cascade::zoo
