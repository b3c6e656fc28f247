#include "cascade/zoo/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "cascade/errors.hpp"

namespace cascade::zoo {

using nlohmann::json;

namespace {

std::string hex_key(std::uint64_t k) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(k));
  return buf;
}

std::uint64_t parse_hex_key(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = std::stoull(s, &pos, 16);
  if (pos != s.size()) throw ConfigError("malformed table key '" + s + "'");
  return v;
}

void check_threshold(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("decider threshold must lie in [0, 1]");
}

int json_output_tokens(const json& j) { return j.value("output_tokens", 1); }

}  // namespace

double softmax_margin(const std::vector<double>& scores) {
  if (scores.size() < 2) return 1.0;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  double first = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    z += std::exp(s - mx);
    if (s > first) {
      second = first;
      first = s;
    } else if (s > second) {
      second = s;
    }
  }
  return (std::exp(first - mx) - std::exp(second - mx)) / z;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

CostModel cost_from_json(const json& j) {
  if (j.is_null()) return {};
  return CostModel{j.value("per_token", 0.0), j.value("fixed", 0.0)};
}

// --- TableModel -------------------------------------------------------------

TableModel::TableModel(int class_count, std::unordered_map<std::uint64_t, TableEntry> entries,
                       TableEntry fallback, CostModel cost, double param_scale,
                       int output_tokens)
    : StageModel(class_count, cost, param_scale, output_tokens),
      entries_(std::move(entries)),
      fallback_(fallback) {
  auto check = [&](const TableEntry& e) {
    if (e.label < 0 || e.label >= class_count) {
      throw ConfigError("table entry label " + std::to_string(e.label) + " outside " +
                        std::to_string(class_count) + " classes");
    }
    // argmax must reproduce the stored label (lowest index wins ties).
    if (!(e.margin > 0.0 || (e.margin == 0.0 && e.label == 0))) {
      throw ConfigError("table entry margin must be positive");
    }
  };
  for (const auto& [k, e] : entries_) check(e);
  check(fallback_);
}

const TableEntry* TableModel::find(const TokenSeq& x) const {
  auto it = entries_.find(x.hash());
  return it == entries_.end() ? nullptr : &it->second;
}

StageOutput TableModel::predict(const TokenSeq& x) const {
  const TableEntry* e = find(x);
  const TableEntry& hit = e ? *e : fallback_;
  std::vector<double> scores(static_cast<std::size_t>(class_count()), 0.0);
  scores[static_cast<std::size_t>(hit.label)] = hit.margin;
  return StageOutput::from_scores(std::move(scores), output_tokens());
}

json TableModel::to_json() const {
  json j = common_json();
  // Sorted by key so serialisation is independent of hash-map iteration order.
  std::vector<std::pair<std::uint64_t, TableEntry>> sorted(entries_.begin(), entries_.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  json entries = json::array();
  for (const auto& [k, e] : sorted) {
    entries.push_back({{"key", hex_key(k)}, {"label", e.label}, {"margin", e.margin}});
  }
  j["entries"] = std::move(entries);
  j["default"] = {{"label", fallback_.label}, {"margin", fallback_.margin}};
  return j;
}

std::shared_ptr<TableModel> TableModel::from_json(const json& j) {
  std::unordered_map<std::uint64_t, TableEntry> entries;
  for (const auto& e : j.value("entries", json::array())) {
    std::uint64_t key;
    if (e.contains("tokens")) {
      key = TokenSeq(e.at("tokens").get<std::vector<TokenId>>()).hash();
    } else {
      key = parse_hex_key(e.at("key").get<std::string>());
    }
    entries[key] = TableEntry{e.at("label").get<int>(), e.at("margin").get<double>()};
  }
  TableEntry fallback;
  if (j.contains("default")) {
    fallback = TableEntry{j["default"].value("label", 0), j["default"].value("margin", 0.0)};
  }
  return std::make_shared<TableModel>(j.at("class_count").get<int>(), std::move(entries),
                                      fallback, cost_from_json(j.value("cost", json())),
                                      j.value("param_scale", 1.0), json_output_tokens(j));
}

// --- LinearBagModel ---------------------------------------------------------

LinearBagModel::LinearBagModel(std::size_t vocab_size, int class_count,
                               std::vector<double> weights, std::vector<double> bias,
                               CostModel cost, double param_scale, int output_tokens)
    : StageModel(class_count, cost, param_scale, output_tokens),
      vocab_size_(vocab_size),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  const auto c = static_cast<std::size_t>(class_count);
  if (weights_.size() != vocab_size_ * c) {
    throw ConfigError("linear_bag weights have " + std::to_string(weights_.size()) +
                      " entries, expected " + std::to_string(vocab_size_ * c));
  }
  if (bias_.size() != c) throw ConfigError("linear_bag bias arity differs from class_count");
}

std::span<const double> LinearBagModel::row(TokenId t) const {
  const auto c = static_cast<std::size_t>(class_count());
  return std::span<const double>(weights_).subspan(static_cast<std::size_t>(t) * c, c);
}

std::vector<double> LinearBagModel::scores(const TokenSeq& x) const {
  std::vector<double> s = bias_;
  for (TokenId t : x) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_) {
      throw ConfigError("token id " + std::to_string(t) + " outside linear_bag vocabulary");
    }
    auto r = row(t);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += r[k];
  }
  return s;
}

StageOutput LinearBagModel::predict(const TokenSeq& x) const {
  return StageOutput::from_scores(scores(x), output_tokens());
}

json LinearBagModel::to_json() const {
  json j = common_json();
  json rows = json::array();
  const auto c = static_cast<std::size_t>(class_count());
  for (std::size_t v = 0; v < vocab_size_; ++v) {
    rows.push_back(std::vector<double>(weights_.begin() + static_cast<std::ptrdiff_t>(v * c),
                                       weights_.begin() + static_cast<std::ptrdiff_t>((v + 1) * c)));
  }
  j["weights"] = std::move(rows);
  j["bias"] = bias_;
  return j;
}

std::shared_ptr<LinearBagModel> LinearBagModel::from_json(const json& j) {
  const int classes = j.at("class_count").get<int>();
  std::vector<double> flat;
  const auto& rows = j.at("weights");
  for (const auto& r : rows) {
    auto v = r.get<std::vector<double>>();
    if (v.size() != static_cast<std::size_t>(classes)) {
      throw ConfigError("linear_bag weight row arity differs from class_count");
    }
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return std::make_shared<LinearBagModel>(rows.size(), classes, std::move(flat),
                                          j.at("bias").get<std::vector<double>>(),
                                          cost_from_json(j.value("cost", json())),
                                          j.value("param_scale", 1.0), json_output_tokens(j));
}

// --- ThresholdDecider -------------------------------------------------------

ThresholdDecider::ThresholdDecider(double threshold, CostModel cost, double param_scale)
    : DecisionModule(cost, param_scale), threshold_(threshold) {
  check_threshold(threshold_);
}

Decision ThresholdDecider::decide(const TokenSeq& /*x*/, const StageOutput& y) const {
  const double conf = softmax_margin(y.scores);
  return Decision{conf < threshold_, conf, threshold_};
}

json ThresholdDecider::to_json() const {
  json j = common_json();
  j["threshold"] = threshold_;
  return j;
}

std::shared_ptr<ThresholdDecider> ThresholdDecider::from_json(const json& j) {
  return std::make_shared<ThresholdDecider>(j.at("threshold").get<double>(),
                                            cost_from_json(j.value("cost", json())),
                                            j.value("param_scale", 0.0));
}

// --- LinearDecider ----------------------------------------------------------

LinearDecider::LinearDecider(std::vector<double> weights, double bias, double threshold,
                             double margin_weight, CostModel cost, double param_scale)
    : DecisionModule(cost, param_scale),
      weights_(std::move(weights)),
      bias_(bias),
      threshold_(threshold),
      margin_weight_(margin_weight) {
  check_threshold(threshold_);
  if (weights_.empty()) throw ConfigError("linear decider needs one weight per vocabulary entry");
}

Decision LinearDecider::decide(const TokenSeq& x, const StageOutput& y) const {
  double z = bias_;
  for (TokenId t : x) {
    if (t < 0 || static_cast<std::size_t>(t) >= weights_.size()) {
      throw ConfigError("token id " + std::to_string(t) + " outside linear decider vocabulary");
    }
    z += weights_[static_cast<std::size_t>(t)];
  }
  z += margin_weight_ * softmax_margin(y.scores);
  const double conf = sigmoid(z);
  return Decision{conf < threshold_, conf, threshold_};
}

json LinearDecider::to_json() const {
  json j = common_json();
  j["weights"] = weights_;
  j["bias"] = bias_;
  j["threshold"] = threshold_;
  j["margin_weight"] = margin_weight_;
  return j;
}

std::shared_ptr<LinearDecider> LinearDecider::from_json(const json& j) {
  return std::make_shared<LinearDecider>(
      j.at("weights").get<std::vector<double>>(), j.value("bias", 0.0),
      j.at("threshold").get<double>(), j.value("margin_weight", 1.0),
      cost_from_json(j.value("cost", json())), j.value("param_scale", 0.0));
}

}  // namespace cascade::zoo
