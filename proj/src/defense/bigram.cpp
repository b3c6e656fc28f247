#include <cmath>
#include <limits>

#include "cascade/defense/defense.hpp"

namespace cascade::defense {

namespace {

// Reserved ids: 0 = <s>, 1 = </s>, 2 = unknown word.
constexpr std::uint64_t kBos = 0;
constexpr std::uint64_t kEos = 1;
constexpr std::uint64_t kUnk = 2;
constexpr std::uint64_t kStride = std::uint64_t{1} << 32;

}  // namespace

BigramModel BigramModel::fit(std::span<const std::string> texts) {
  BigramModel m;
  std::uint64_t next_id = 3;
  for (const auto& t : texts) {
    for (const auto& w : zoo::split_words(t)) {
      if (m.ids_.emplace(w, next_id).second) ++next_id;
    }
  }
  m.types_ = m.ids_.size();
  for (const auto& t : texts) {
    const auto words = zoo::split_words(t);
    if (words.empty()) continue;
    std::uint64_t prev = kBos;
    for (const auto& w : words) {
      const std::uint64_t id = m.ids_.at(w);
      ++m.unigram_[prev];
      ++m.bigram_[prev * kStride + id];
      prev = id;
    }
    ++m.unigram_[prev];
    ++m.bigram_[prev * kStride + kEos];
  }
  return m;
}

std::uint64_t BigramModel::id_of(const std::string& w) const {
  auto it = ids_.find(w);
  return it == ids_.end() ? kUnk : it->second;
}

double BigramModel::cond_log_prob(std::uint64_t prev, std::uint64_t next) const {
  // Outcomes: every known type, the end marker and the unknown word.
  const double outcomes = static_cast<double>(types_ + 2);
  auto u = unigram_.find(prev);
  auto b = bigram_.find(prev * kStride + next);
  const double context = u == unigram_.end() ? 0.0 : static_cast<double>(u->second);
  const double pair = b == bigram_.end() ? 0.0 : static_cast<double>(b->second);
  return std::log((pair + 1.0) / (context + outcomes));
}

double BigramModel::log_prob(std::string_view text) const {
  double lp = 0.0;
  std::uint64_t prev = kBos;
  for (const auto& w : zoo::split_words(text)) {
    const std::uint64_t id = id_of(w);
    lp += cond_log_prob(prev, id);
    prev = id;
  }
  return lp + cond_log_prob(prev, kEos);
}

double BigramModel::perplexity(std::string_view text) const {
  const std::size_t n = zoo::split_words(text).size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return std::exp(-log_prob(text) / static_cast<double>(n + 1));
}

}  // namespace cascade::defense
