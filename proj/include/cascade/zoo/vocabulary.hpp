#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cascade/token_seq.hpp"

namespace cascade::zoo {

inline constexpr std::string_view kUnknownSurface = "<unk>";
inline constexpr std::string_view kPadSurface = "<pad>";

// Bijection between ids and whitespace-free surface strings. Both special
// surfaces must be present; every out-of-vocabulary surface encodes to the
// unknown id.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> surfaces);

  // ["<unk>", "<pad>", words...]
  static Vocabulary with_specials(const std::vector<std::string>& words);

  // Plain text, one surface per line; line number = id.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return surfaces_.size(); }
  TokenId unk_id() const { return unk_id_; }
  TokenId pad_id() const { return pad_id_; }

  bool contains(std::string_view surface) const;
  TokenId id(std::string_view surface) const;
  const std::string& surface(TokenId id) const;
  const std::vector<std::string>& surfaces() const { return surfaces_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.surfaces_ == b.surfaces_;
  }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId unk_id_ = 0;
  TokenId pad_id_ = 0;
};

// Whitespace split, unknown surfaces map to vocab.unk_id().
TokenSeq encode(const Vocabulary& vocab, std::string_view text);
// Surfaces joined by single spaces.
std::string decode(const Vocabulary& vocab, const TokenSeq& tokens);

std::vector<std::string> split_words(std::string_view text);

}  // namespace cascade::zoo
