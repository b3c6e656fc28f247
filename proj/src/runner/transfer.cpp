#include "cascade/runner/transfer.hpp"

#include <algorithm>

#include "cascade/errors.hpp"
#include "cascade/runner/atomic_file.hpp"
#include "cascade/runner/summary.hpp"

namespace cascade::runner {

using nlohmann::json;

SuffixFile suffix_file_from_json(const json& j) {
  try {
    SuffixFile f;
    f.universal = j.value("universal", false);
    if (f.universal) {
      f.universal_text = j.at("text").get<std::string>();
      return f;
    }
    for (const auto& s : j.at("suffixes")) {
      const int id = s.at("sample_id").get<int>();
      if (!f.per_sample.emplace(id, s.at("text").get<std::string>()).second) {
        throw IntegrityError("suffix file lists sample " + std::to_string(id) + " twice");
      }
    }
    return f;
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed suffix file: ") + e.what());
  }
}

SuffixFile load_suffix_file(const std::filesystem::path& path) { return suffix_file_from_json(read_json(path)); }

TransferResult transfer_eval(const SuffixFile& suffixes, const BuiltExperiment& target, std::size_t threads) {
  TransferResult r;
  const auto& vocab = *target.vocab;
  auto map_text = [&](const std::string& text) {
    TokenSeq out;
    for (const auto& w : zoo::split_words(text)) {
      if (!vocab.contains(w)) {
        ++r.unknown_tokens;
        if (std::find(r.unknown_surfaces.begin(), r.unknown_surfaces.end(), w) == r.unknown_surfaces.end()) {
          r.unknown_surfaces.push_back(w);
        }
      }
      out.push_back(vocab.id(w));
    }
    return out;
  };

  std::vector<TokenSeq> clean_inputs, attacked;
  const TokenSeq universal = suffixes.universal ? map_text(suffixes.universal_text) : TokenSeq{};
  for (const auto& s : target.corpus.samples) {
    clean_inputs.push_back(s.input);
    if (suffixes.universal) {
      attacked.push_back(concat(s.input, universal));
      continue;
    }
    auto it = suffixes.per_sample.find(s.id);
    if (it == suffixes.per_sample.end()) {
      throw IntegrityError("suffix file has no entry for sample " + std::to_string(s.id));
    }
    attacked.push_back(concat(s.input, map_text(it->second)));
  }
  r.clean = evaluate_inputs(target, clean_inputs, threads).metrics;
  r.attacked = evaluate_inputs(target, attacked, threads).metrics;
  return r;
}

std::string render_transfer(const TransferResult& r) {
  std::string out = metrics::render_markdown({{"clean", r.clean}, {"transfer", r.attacked}});
  out += "| Δ transfer | " + format_delta(r.attacked.task_metric, r.clean.task_metric) + " | " +
         format_delta(r.attacked.normalized_token_cost, r.clean.normalized_token_cost) + " | " +
         format_delta(r.attacked.simulated_time, r.clean.simulated_time) + " |";
  for (std::size_t i = 0; i < r.clean.pass_rates.size(); ++i) {
    out += " " + format_delta(r.attacked.pass_rates[i], r.clean.pass_rates[i]) + " |";
  }
  out += "\n";
  if (r.unknown_tokens > 0) {
    out += "\nwarning: " + std::to_string(r.unknown_tokens) + " suffix tokens mapped to the unknown id:";
    for (const auto& s : r.unknown_surfaces) out += " " + s;
    out += "\n";
  }
  return out;
}

}  // namespace cascade::runner
