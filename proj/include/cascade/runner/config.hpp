#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cascade/attack/attack.hpp"
#include "cascade/defense/defense.hpp"
#include "cascade/zoo/planted.hpp"

namespace cascade::runner {

inline constexpr const char* kSchema = "cascade-experiment/1";
inline constexpr const char* kOutputRootEnv = "CASCADE_OUTPUT_ROOT";

struct CascadeSource {
  // "attackable", "planted" or "document" (inline or from a file).
  std::string generator = "attackable";
  zoo::AttackableProfile attackable;
  zoo::PlantedProfile planted;
  nlohmann::json document;
  std::string file;  // document path, relative to the config file
};

struct AttackSection {
  // Subset of random_noise, single_acc, single_cost, dm_flip, joint.
  std::vector<std::string> modes;
  std::vector<int> targets{1};
  std::size_t rounds = 2;
  std::size_t slots_per_phase = 2;
  std::size_t iterations = 10;
  std::size_t candidate_pool = 32;
  std::size_t substitutions = 2;
  attack::Backend backend = attack::Backend::greedy;
  attack::LossKind loss = attack::LossKind::margin;
  std::vector<double> pass_rates{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::string> attack_vocab;  // surfaces; empty uses the generator's default
  std::size_t max_samples = 0;            // 0 attacks the whole corpus
};

struct DefenseEntry {
  // "ppl", "regex", "cpt" or "smoothing".
  std::string kind;
  std::vector<double> strengths;  // ordered from lenient to strict; σ for smoothing
  std::size_t trim = 0;
  std::size_t n_draws = 1;  // smoothing only
};

struct ExperimentConfig {
  std::string schema = kSchema;
  std::uint64_t seed = 0;
  std::string output_dir;
  CascadeSource cascade;
  std::string corpus_file;  // optional JSONL corpus replacing the generated one
  std::optional<AttackSection> attack;
  std::vector<DefenseEntry> defense;
  std::filesystem::path base_dir;  // directory of the config file; not serialized
};

// Throws ConfigError listing every offending field.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// output_dir if absolute; otherwise resolved against $CASCADE_OUTPUT_ROOT
// (or the working directory when unset).
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

}  // namespace cascade::runner
