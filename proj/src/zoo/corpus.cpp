#include "cascade/zoo/corpus.hpp"

#include <fstream>

#include "json.hpp"

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"

namespace cascade::zoo {

using nlohmann::json;

void write_corpus_jsonl(const std::filesystem::path& path, const SyntheticCorpus& corpus,
                        const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write corpus file " + path.string());
  for (const auto& s : corpus.samples) {
    json j;
    j["text"] = decode(vocab, s.input);
    if (s.label.is_class()) {
      j["label"] = s.label.class_id();
    } else {
      j["label"] = decode(vocab, s.label.answer());
    }
    out << j.dump() << '\n';
  }
}

SyntheticCorpus read_corpus_jsonl(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file " + path.string());
  SyntheticCorpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("corpus line " + std::to_string(line_no + 1) + ": " + e.what());
    }
    if (!j.contains("text") || !j.contains("label")) {
      throw ConfigError("corpus line " + std::to_string(line_no + 1) + " lacks text or label");
    }
    Sample s;
    s.id = line_no;
    s.input = encode(vocab, j["text"].get<std::string>());
    const auto& lab = j["label"];
    if (lab.is_number_integer()) {
      s.label = Label::of_class(lab.get<int>());
    } else if (lab.is_string()) {
      s.label = Label::of_answer(encode(vocab, lab.get<std::string>()));
    } else {
      throw ConfigError("corpus line " + std::to_string(line_no + 1) +
                        ": label must be an integer or a string");
    }
    corpus.samples.push_back(std::move(s));
    ++line_no;
  }
  return corpus;
}

TokenSeq random_suffix(std::span<const TokenId> pool, std::size_t length, std::uint64_t seed) {
  if (length == 0) return {};
  if (pool.empty()) throw ConfigError("random suffix needs a non-empty token pool");
  Rng rng(seed);
  TokenSeq out;
  for (std::size_t i = 0; i < length; ++i) out.push_back(pool[rng.uniform_index(pool.size())]);
  return out;
}

}  // namespace cascade::zoo
