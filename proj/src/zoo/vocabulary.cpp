#include "cascade/zoo/vocabulary.hpp"

#include <cctype>
#include <fstream>

#include "cascade/errors.hpp"

namespace cascade::zoo {

namespace {

bool has_space(std::string_view s) {
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) return true;
  }
  return false;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> surfaces) : surfaces_(std::move(surfaces)) {
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    const std::string& s = surfaces_[i];
    if (s.empty() || has_space(s)) {
      throw ConfigError("vocabulary entry " + std::to_string(i) + " is empty or contains whitespace");
    }
    auto [it, inserted] = index_.emplace(s, static_cast<TokenId>(i));
    if (!inserted) throw ConfigError("duplicate vocabulary surface '" + s + "'");
  }
  auto unk = index_.find(std::string(kUnknownSurface));
  auto pad = index_.find(std::string(kPadSurface));
  if (unk == index_.end()) throw ConfigError("vocabulary lacks the <unk> entry");
  if (pad == index_.end()) throw ConfigError("vocabulary lacks the <pad> entry");
  unk_id_ = unk->second;
  pad_id_ = pad->second;
}

Vocabulary Vocabulary::with_specials(const std::vector<std::string>& words) {
  std::vector<std::string> all{std::string(kUnknownSurface), std::string(kPadSurface)};
  all.insert(all.end(), words.begin(), words.end());
  return Vocabulary(std::move(all));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vocabulary file " + path.string());
  std::vector<std::string> surfaces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    surfaces.push_back(line);
  }
  return Vocabulary(std::move(surfaces));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write vocabulary file " + path.string());
  for (const auto& s : surfaces_) out << s << '\n';
}

bool Vocabulary::contains(std::string_view surface) const {
  return index_.find(std::string(surface)) != index_.end();
}

TokenId Vocabulary::id(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  return it == index_.end() ? unk_id_ : it->second;
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size()) {
    throw ConfigError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return surfaces_[static_cast<std::size_t>(id)];
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

TokenSeq encode(const Vocabulary& vocab, std::string_view text) {
  TokenSeq out;
  for (const auto& w : split_words(text)) out.push_back(vocab.id(w));
  return out;
}

std::string decode(const Vocabulary& vocab, const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.surface(tokens[i]);
  }
  return out;
}

}  // namespace cascade::zoo
