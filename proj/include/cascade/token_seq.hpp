#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

namespace cascade {

using TokenId = std::int32_t;

// Bounded sequence of vocabulary ids. Surface text is recovered through the
// owning Vocabulary (see zoo/vocabulary.hpp).
class TokenSeq {
 public:
  TokenSeq() = default;
  explicit TokenSeq(std::vector<TokenId> tokens) : tokens_(std::move(tokens)) {}
  TokenSeq(std::initializer_list<TokenId> tokens) : tokens_(tokens) {}

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  TokenId operator[](std::size_t i) const { return tokens_[i]; }
  TokenId& operator[](std::size_t i) { return tokens_[i]; }

  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }
  std::span<const TokenId> span() const { return tokens_; }
  const std::vector<TokenId>& tokens() const { return tokens_; }

  void push_back(TokenId t) { tokens_.push_back(t); }
  TokenSeq& append(const TokenSeq& other);

  // First `n` tokens (or all of them when n >= size()).
  TokenSeq prefix(std::size_t n) const;

  // Throws ConfigError when an id is outside [0, vocab_size) or the length
  // exceeds max_length.
  void validate(std::size_t vocab_size, std::size_t max_length) const;

  // FNV-1a over the token ids; stable across runs and platforms.
  std::uint64_t hash() const;

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
  friend auto operator<=>(const TokenSeq&, const TokenSeq&) = default;

 private:
  std::vector<TokenId> tokens_;
};

// x ∥ δ
TokenSeq concat(const TokenSeq& head, const TokenSeq& tail);

struct TokenSeqHash {
  std::size_t operator()(const TokenSeq& s) const { return static_cast<std::size_t>(s.hash()); }
};

// Ground truth or prediction: a class id, or a free-form answer sequence.
class Label {
 public:
  Label() : value_(0) {}
  static Label of_class(int id) { return Label(id); }
  static Label of_answer(TokenSeq text) { return Label(std::move(text)); }

  bool is_class() const { return std::holds_alternative<int>(value_); }
  int class_id() const;
  const TokenSeq& answer() const;

  // Token-exact comparison. Normalised answer comparison lives in
  // metrics::same_answer.
  friend bool operator==(const Label&, const Label&) = default;

 private:
  explicit Label(int id) : value_(id) {}
  explicit Label(TokenSeq text) : value_(std::move(text)) {}
  std::variant<int, TokenSeq> value_;
};

}  // namespace cascade
