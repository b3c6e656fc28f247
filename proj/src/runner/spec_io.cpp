#include "cascade/runner/spec_io.hpp"

#include "cascade/errors.hpp"
#include "cascade/runner/remote_stage.hpp"
#include "cascade/zoo/models.hpp"

namespace cascade::runner {

using nlohmann::json;

StagePtr stage_from_json(const json& j, std::shared_ptr<const zoo::Vocabulary> vocab) {
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "table") return zoo::TableModel::from_json(j);
    if (kind == "linear_bag") return zoo::LinearBagModel::from_json(j);
    if (kind == "remote") {
      return std::make_shared<RemoteStageModel>(
          Endpoint::parse(j.at("endpoint").get<std::string>(), j.value("timeout_ms", 5000)),
          j.at("class_count").get<int>(), std::move(vocab), zoo::cost_from_json(j.value("cost", json())),
          j.value("param_scale", 1.0), j.value("output_tokens", 1));
    }
  } catch (const json::exception& e) {
    throw ConfigError("stage of kind '" + kind + "': " + e.what());
  }
  throw ConfigError("unknown stage kind '" + kind + "'");
}

DeciderPtr decider_from_json(const json& j) {
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "threshold") return zoo::ThresholdDecider::from_json(j);
    if (kind == "linear") return zoo::LinearDecider::from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("decider of kind '" + kind + "': " + e.what());
  }
  throw ConfigError("unknown decider kind '" + kind + "'");
}

LoadedCascade cascade_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("cascade document must be an object");
  std::shared_ptr<const zoo::Vocabulary> vocab;
  try {
    if (doc.contains("vocab")) {
      vocab = std::make_shared<zoo::Vocabulary>(doc.at("vocab").get<std::vector<std::string>>());
    } else if (doc.contains("vocab_file")) {
      std::filesystem::path p = doc.at("vocab_file").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      vocab = std::make_shared<zoo::Vocabulary>(zoo::Vocabulary::load(p));
    } else {
      throw ConfigError("cascade document needs 'vocab' or 'vocab_file'");
    }
    std::vector<StagePtr> stages;
    for (const auto& s : doc.at("stages")) stages.push_back(stage_from_json(s, vocab));
    std::vector<DeciderPtr> deciders;
    for (const auto& d : doc.value("deciders", json::array())) deciders.push_back(decider_from_json(d));
    const std::size_t max_len = doc.value("max_sequence_length", CascadeSpec::kDefaultMaxLength);
    CascadeSpec spec(std::move(stages), std::move(deciders), vocab->size(), max_len);
    return LoadedCascade{vocab, std::move(spec)};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cascade document: ") + e.what());
  }
}

json cascade_to_json(const CascadeSpec& spec, const zoo::Vocabulary& vocab) {
  json stages = json::array();
  for (const auto& s : spec.stages()) stages.push_back(s->to_json());
  json deciders = json::array();
  for (const auto& d : spec.deciders()) deciders.push_back(d->to_json());
  return json{{"vocab", vocab.surfaces()},
              {"max_sequence_length", spec.max_sequence_length()},
              {"stages", std::move(stages)},
              {"deciders", std::move(deciders)}};
}

}  // namespace cascade::runner
