#pragma once

#include <memory>
#include <string>

#include "cascade/cascade.hpp"
#include "cascade/zoo/vocabulary.hpp"

namespace cascade::runner {

// http://host[:port][/path]
struct Endpoint {
  std::string host;
  int port = 80;
  std::string path = "/";
  int timeout_ms = 5000;

  static Endpoint parse(const std::string& url, int timeout_ms = 5000);
  std::string url() const;
};

// POSTs {"input": text, "want_scores": true} and expects
// {"prediction": int, "scores": [...], "output_token_count": n}. Any transport
// failure, malformed body or arity mismatch throws StageError naming the
// endpoint and carrying the raw body.
StageOutput remote_stage_call(const Endpoint& endpoint, const std::string& text, int class_count);

// Stage model served over HTTP. Excluded from determinism guarantees.
class RemoteStageModel final : public StageModel {
 public:
  RemoteStageModel(Endpoint endpoint, int class_count, std::shared_ptr<const zoo::Vocabulary> vocab,
                   CostModel cost = {}, double param_scale = 1.0, int output_tokens = 1);

  StageOutput predict(const TokenSeq& x) const override;
  std::string kind() const override { return "remote"; }
  nlohmann::json to_json() const override;
  bool deterministic() const override { return false; }
  const Endpoint& endpoint() const { return endpoint_; }

 private:
  Endpoint endpoint_;
  std::shared_ptr<const zoo::Vocabulary> vocab_;
};

}  // namespace cascade::runner
