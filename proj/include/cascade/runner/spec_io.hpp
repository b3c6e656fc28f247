#pragma once

#include <filesystem>
#include <memory>

#include "json.hpp"

#include "cascade/cascade.hpp"
#include "cascade/zoo/vocabulary.hpp"

namespace cascade::runner {

struct LoadedCascade {
  std::shared_ptr<const zoo::Vocabulary> vocab;
  CascadeSpec spec;
};

// Cascade document:
//   {"vocab": [surfaces] | "vocab_file": path, "max_sequence_length": n,
//    "stages": [{"kind": "table" | "linear_bag" | "remote", ...}],
//    "deciders": [{"kind": "threshold" | "linear", ...}]}
// Relative vocab_file paths resolve against base_dir. Errors are ConfigError.
LoadedCascade cascade_from_json(const nlohmann::json& doc,
                                const std::filesystem::path& base_dir = {});

// Inline-vocabulary document that cascade_from_json reads back.
nlohmann::json cascade_to_json(const CascadeSpec& spec, const zoo::Vocabulary& vocab);

StagePtr stage_from_json(const nlohmann::json& j, std::shared_ptr<const zoo::Vocabulary> vocab);
DeciderPtr decider_from_json(const nlohmann::json& j);

}  // namespace cascade::runner
