#include "cascade/attack/report_io.hpp"

#include "cascade/errors.hpp"

namespace cascade::attack {

using nlohmann::json;

json objective_to_json(const ObjectiveValue& v) {
  return json{{"primary", v.primary}, {"tiebreak", v.tiebreak}};
}

json report_to_json(const AttackReport& report, const zoo::Vocabulary* vocab) {
  json rounds = json::array();
  for (const auto& log : report.per_round) {
    json traj = json::array();
    for (const auto& v : log.trajectory) traj.push_back(json::array({v.primary, v.tiebreak}));
    rounds.push_back(json{{"phase", log.phase},
                          {"round", log.round},
                          {"objective_before", objective_to_json(log.before)},
                          {"objective_after", objective_to_json(log.after)},
                          {"tier", log.tier ? json(to_string(*log.tier)) : json(nullptr)},
                          {"direction", to_string(log.direction)},
                          {"restarts", log.restarts},
                          {"trajectory", std::move(traj)}});
  }
  json j{{"sample_id", report.sample_id},
         {"mode", to_string(report.mode)},
         {"per_round", std::move(rounds)},
         {"suffix_tokens", report.suffix.assembled().tokens()}};
  if (vocab) j["suffix_text"] = zoo::decode(*vocab, report.suffix.assembled());
  return j;
}

json neighborhood_to_json(const Neighborhood& nb) {
  return json{{"slots_per_phase", nb.suffix_slots_per_phase},
              {"rounds", nb.rounds},
              {"candidate_pool", nb.candidate_pool_size},
              {"substitutions", nb.substitutions_per_iteration}};
}

Neighborhood neighborhood_from_json(const json& j, std::vector<TokenId> attack_vocab) {
  Neighborhood nb;
  try {
    nb.suffix_slots_per_phase = j.value("slots_per_phase", nb.suffix_slots_per_phase);
    nb.rounds = j.value("rounds", nb.rounds);
    nb.candidate_pool_size = j.value("candidate_pool", nb.candidate_pool_size);
    nb.substitutions_per_iteration = j.value("substitutions", nb.substitutions_per_iteration);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("attack neighborhood: ") + e.what());
  }
  nb.attack_vocab = std::move(attack_vocab);
  return nb;
}

}  // namespace cascade::attack
