#pragma once

#include "json.hpp"

#include "cascade/attack/attack.hpp"
#include "cascade/zoo/vocabulary.hpp"

namespace cascade::attack {

// {sample_id, mode, per_round: [...], suffix_tokens, suffix_text}. The text
// field is omitted when no vocabulary is given.
nlohmann::json report_to_json(const AttackReport& report, const zoo::Vocabulary* vocab = nullptr);

nlohmann::json objective_to_json(const ObjectiveValue& v);

// Attack section of an experiment document. attack_vocab is supplied by the
// caller (it depends on the cascade), so it is not serialized.
nlohmann::json neighborhood_to_json(const Neighborhood& nb);
Neighborhood neighborhood_from_json(const nlohmann::json& j, std::vector<TokenId> attack_vocab);

}  // namespace cascade::attack
