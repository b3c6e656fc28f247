#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cascade/metrics/metrics.hpp"
#include "cascade/runner/experiment.hpp"

namespace cascade::runner {

// suffixes.json as written by run_experiment, or {"universal": true, "text": ...}.
struct SuffixFile {
  bool universal = false;
  std::string universal_text;
  std::map<int, std::string> per_sample;  // sample id -> suffix surface text
};

SuffixFile suffix_file_from_json(const nlohmann::json& j);
SuffixFile load_suffix_file(const std::filesystem::path& path);

struct TransferResult {
  metrics::MetricReport clean;
  metrics::MetricReport attacked;
  std::size_t unknown_tokens = 0;           // suffix surfaces mapped to the unknown id
  std::vector<std::string> unknown_surfaces;  // distinct, in first-seen order
};

// Appends each stored suffix (mapped through surfaces into the target
// vocabulary) to its sample and compares against the clean baseline.
// Throws IntegrityError when a corpus sample has no suffix.
TransferResult transfer_eval(const SuffixFile& suffixes, const BuiltExperiment& target,
                             std::size_t threads = 1);

std::string render_transfer(const TransferResult& r);

}  // namespace cascade::runner
