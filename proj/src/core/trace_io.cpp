#include "cascade/trace_io.hpp"

#include "cascade/errors.hpp"

namespace cascade {

nlohmann::json label_to_json(const Label& label) {
  if (label.is_class()) return label.class_id();
  return label.answer().tokens();
}

Label label_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Label::of_class(j.get<int>());
  if (j.is_array()) return Label::of_answer(TokenSeq(j.get<std::vector<TokenId>>()));
  throw ConfigError("label must be an integer class id or an array of token ids");
}

nlohmann::json trace_to_json(const ExecutionTrace& trace, int sample_id) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& rec : trace.per_stage) {
    nlohmann::json decision = nullptr;
    if (rec.decision) {
      decision = {{"escalate", rec.decision->escalate ? 1 : 0},
                  {"confidence", rec.decision->confidence},
                  {"threshold", rec.decision->threshold}};
    }
    stages.push_back({{"stage", rec.stage},
                      {"prediction", label_to_json(rec.output.prediction)},
                      {"scores", rec.output.scores},
                      {"output_token_count", rec.output.output_token_count},
                      {"decision", decision},
                      {"model_cost", rec.model_cost},
                      {"decider_cost", rec.decider_cost},
                      {"input_tokens", rec.input_tokens},
                      {"model_scale", rec.model_scale},
                      {"decider_scale", rec.decider_scale}});
  }
  return {{"sample_id", sample_id},
          {"stage_count", trace.stage_count},
          {"stopping_index", trace.stopping_index},
          {"final_output", label_to_json(trace.final_output)},
          {"total_cost", trace.total_cost},
          {"per_stage", std::move(stages)}};
}

ExecutionTrace trace_from_json(const nlohmann::json& j) {
  try {
    ExecutionTrace trace;
    trace.stage_count = j.at("stage_count").get<int>();
    trace.stopping_index = j.at("stopping_index").get<int>();
    trace.final_output = label_from_json(j.at("final_output"));
    trace.total_cost = j.at("total_cost").get<double>();
    for (const auto& s : j.at("per_stage")) {
      StageRecord rec;
      rec.stage = s.at("stage").get<int>();
      rec.output.prediction = label_from_json(s.at("prediction"));
      rec.output.scores = s.at("scores").get<std::vector<double>>();
      rec.output.output_token_count = s.at("output_token_count").get<int>();
      const auto& d = s.at("decision");
      if (!d.is_null()) {
        rec.decision = Decision{d.at("escalate").get<int>() != 0, d.at("confidence").get<double>(),
                                d.at("threshold").get<double>()};
      }
      rec.model_cost = s.at("model_cost").get<double>();
      rec.decider_cost = s.at("decider_cost").get<double>();
      rec.input_tokens = s.at("input_tokens").get<std::size_t>();
      rec.model_scale = s.at("model_scale").get<double>();
      rec.decider_scale = s.at("decider_scale").get<double>();
      trace.per_stage.push_back(std::move(rec));
    }
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed trace record: ") + e.what());
  }
}

}  // namespace cascade
