#include "cascade/token_seq.hpp"

#include <string>

#include "cascade/errors.hpp"

namespace cascade {

TokenSeq& TokenSeq::append(const TokenSeq& other) {
  tokens_.insert(tokens_.end(), other.tokens_.begin(), other.tokens_.end());
  return *this;
}

TokenSeq TokenSeq::prefix(std::size_t n) const {
  if (n >= tokens_.size()) return *this;
  return TokenSeq(std::vector<TokenId>(tokens_.begin(), tokens_.begin() + static_cast<std::ptrdiff_t>(n)));
}

void TokenSeq::validate(std::size_t vocab_size, std::size_t max_length) const {
  if (tokens_.size() > max_length) {
    throw ConfigError("token sequence of length " + std::to_string(tokens_.size()) +
                      " exceeds max_sequence_length " + std::to_string(max_length));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    TokenId t = tokens_[i];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
      throw ConfigError("token id " + std::to_string(t) + " at position " + std::to_string(i) +
                        " is outside vocabulary of size " + std::to_string(vocab_size));
    }
  }
}

std::uint64_t TokenSeq::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (TokenId t : tokens_) {
    auto u = static_cast<std::uint32_t>(t);
    for (int b = 0; b < 4; ++b) {
      h ^= (u >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  // Length is folded in so that a sequence and its zero-padded extension differ.
  h ^= static_cast<std::uint64_t>(tokens_.size());
  h *= 0x100000001b3ULL;
  return h;
}

TokenSeq concat(const TokenSeq& head, const TokenSeq& tail) {
  TokenSeq out = head;
  out.append(tail);
  return out;
}

int Label::class_id() const {
  if (!is_class()) throw ConfigError("label is an answer sequence, not a class id");
  return std::get<int>(value_);
}

const TokenSeq& Label::answer() const {
  if (is_class()) throw ConfigError("label is a class id, not an answer sequence");
  return std::get<TokenSeq>(value_);
}

}  // namespace cascade
