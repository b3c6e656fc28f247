#include "cascade/runner/remote_stage.hpp"

#include <chrono>

#include "httplib.h"
#include "json.hpp"

#include "cascade/errors.hpp"

namespace cascade::runner {

using nlohmann::json;

Endpoint Endpoint::parse(const std::string& url, int timeout_ms) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw ConfigError("remote endpoint '" + url + "' must start with http://");
  std::string rest = url.substr(scheme.size());
  Endpoint e;
  e.timeout_ms = timeout_ms;
  const auto slash = rest.find('/');
  if (slash != std::string::npos) {
    e.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      e.port = std::stoi(rest.substr(colon + 1), &used);
      if (used != rest.size() - colon - 1) throw std::invalid_argument("port");
    } catch (const std::exception&) {
      throw ConfigError("remote endpoint '" + url + "' has a malformed port");
    }
    rest = rest.substr(0, colon);
  }
  if (rest.empty()) throw ConfigError("remote endpoint '" + url + "' has no host");
  if (timeout_ms <= 0) throw ConfigError("remote endpoint timeout must be positive");
  e.host = rest;
  return e;
}

std::string Endpoint::url() const { return "http://" + host + ":" + std::to_string(port) + path; }

StageOutput remote_stage_call(const Endpoint& endpoint, const std::string& text, int class_count) {
  httplib::Client client(endpoint.host, endpoint.port);
  const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const json request{{"input", text}, {"want_scores", true}};
  auto res = client.Post(endpoint.path, request.dump(), "application/json");
  const std::string who = "remote stage " + endpoint.url();
  if (!res) throw StageError(who + ": request failed (" + httplib::to_string(res.error()) + ")");
  const std::string& body = res->body;
  if (res->status != 200) {
    throw StageError(who + ": HTTP " + std::to_string(res->status) + ", body: " + body);
  }
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw StageError(who + ": malformed JSON body: " + body);
  }
  try {
    auto scores = j.at("scores").get<std::vector<double>>();
    if (scores.size() != static_cast<std::size_t>(class_count)) {
      throw StageError(who + ": scores arity " + std::to_string(scores.size()) + " does not match " +
                       std::to_string(class_count) + " classes, body: " + body);
    }
    const int prediction = j.at("prediction").get<int>();
    const int out_tokens = j.value("output_token_count", 1);
    if (out_tokens < 1) throw StageError(who + ": output_token_count must be >= 1, body: " + body);
    StageOutput out = StageOutput::from_scores(std::move(scores), out_tokens);
    if (out.prediction.class_id() != prediction) {
      throw StageError(who + ": prediction " + std::to_string(prediction) +
                       " is not the argmax of the returned scores, body: " + body);
    }
    return out;
  } catch (const json::exception&) {
    throw StageError(who + ": response lacks prediction/scores, body: " + body);
  }
}

RemoteStageModel::RemoteStageModel(Endpoint endpoint, int class_count,
                                   std::shared_ptr<const zoo::Vocabulary> vocab, CostModel cost,
                                   double param_scale, int output_tokens)
    : StageModel(class_count, cost, param_scale, output_tokens),
      endpoint_(std::move(endpoint)),
      vocab_(std::move(vocab)) {
  if (!vocab_) throw ConfigError("remote stage needs a vocabulary to render inputs");
}

StageOutput RemoteStageModel::predict(const TokenSeq& x) const {
  return remote_stage_call(endpoint_, zoo::decode(*vocab_, x), class_count());
}

nlohmann::json RemoteStageModel::to_json() const {
  json j = common_json();
  j["endpoint"] = endpoint_.url();
  j["timeout_ms"] = endpoint_.timeout_ms;
  return j;
}

}  // namespace cascade::runner
