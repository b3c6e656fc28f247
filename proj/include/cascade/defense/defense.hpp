#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cascade/cascade.hpp"
#include "cascade/zoo/vocabulary.hpp"

namespace cascade::defense {

enum class FilterKind { ppl, regex, cpt };

std::string to_string(FilterKind k);
FilterKind filter_kind_from_string(const std::string& s);

// strength: ppl quantile q in (0,1], regex special-character ratio in [0,1],
// cpt threshold > 0 (may be +inf). trim: tail words removed on trigger.
struct FilterConfig {
  FilterKind kind = FilterKind::regex;
  double strength = 0.0;
  std::size_t trim = 0;

  void validate() const;
};

struct SmoothingConfig {
  double sigma = 0.35;
  std::size_t n_draws = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FilterResult {
  std::string text;
  bool triggered = false;
};

// First max(0, words - n) whitespace-separated words, joined by single spaces.
std::string trim_tail_words(std::string_view text, std::size_t n);

// Add-one smoothed word bigram model with sentence boundary markers.
class BigramModel {
 public:
  static BigramModel fit(std::span<const std::string> texts);

  double log_prob(std::string_view text) const;
  // exp(-log_prob / (words + 1)); the +1 is the end marker. NaN for empty text.
  double perplexity(std::string_view text) const;
  std::size_t type_count() const { return types_; }

 private:
  std::uint64_t id_of(const std::string& w) const;
  double cond_log_prob(std::uint64_t prev, std::uint64_t next) const;

  std::unordered_map<std::string, std::uint64_t> ids_;
  std::unordered_map<std::uint64_t, std::uint64_t> unigram_;  // context counts
  std::unordered_map<std::uint64_t, std::uint64_t> bigram_;   // key prev * K + next
  std::size_t types_ = 0;
};

// Special-character ratio: characters that are neither alphanumeric nor
// whitespace over all characters; 0 for empty text.
double special_char_ratio(std::string_view text);

// Characters (including separators) per encoded token; 0 when the text
// encodes to no tokens.
double chars_per_token(std::string_view text, const zoo::Vocabulary& vocab);

class TextFilter {
 public:
  static TextFilter regex(FilterConfig cfg);
  static TextFilter cpt(FilterConfig cfg, std::shared_ptr<const zoo::Vocabulary> vocab);
  // Threshold is the nearest-rank q-quantile of the clean texts' perplexity.
  static TextFilter ppl(FilterConfig cfg, std::shared_ptr<const BigramModel> model,
                        std::span<const std::string> clean_texts);

  FilterResult apply(std::string_view text) const;
  bool triggers(std::string_view text) const;
  const FilterConfig& config() const { return cfg_; }
  double threshold() const { return threshold_; }

 private:
  explicit TextFilter(FilterConfig cfg) : cfg_(cfg) {}

  FilterConfig cfg_;
  double threshold_ = 0.0;
  std::shared_ptr<const zoo::Vocabulary> vocab_;
  std::shared_ptr<const BigramModel> model_;
};

FilterResult regex_filter(std::string_view text, const FilterConfig& cfg);
FilterResult cpt_filter(std::string_view text, const zoo::Vocabulary& vocab, const FilterConfig& cfg);

// Majority vote over n_draws noisy argmaxes of model scores; scores are the
// mean noisy vectors. Noise is keyed by (seed, salt, x). σ = 0 returns
// model.predict(x) unchanged.
StageOutput smooth_predict(const StageModel& model, const TokenSeq& x, const SmoothingConfig& cfg,
                           std::uint64_t salt = 0);

class SmoothedStageModel final : public StageModel {
 public:
  SmoothedStageModel(StagePtr inner, SmoothingConfig cfg, std::uint64_t salt);

  StageOutput predict(const TokenSeq& x) const override;
  double cost_of(const TokenSeq& x) const override { return inner_->cost_of(x); }
  std::string kind() const override { return "smoothed"; }
  nlohmann::json to_json() const override;
  std::size_t vocab_size() const override { return inner_->vocab_size(); }
  bool deterministic() const override { return inner_->deterministic(); }

 private:
  StagePtr inner_;
  SmoothingConfig cfg_;
  std::uint64_t salt_;
};

// Every stage wrapped in SmoothedStageModel (salted by its index).
CascadeSpec smooth_cascade(const CascadeSpec& spec, const SmoothingConfig& cfg);

// A filter on the text channel, smoothing on the model side, or neither.
struct Defense {
  std::optional<TextFilter> filter;
  std::optional<SmoothingConfig> smoothing;
  std::shared_ptr<const zoo::Vocabulary> vocab;

  CascadeSpec prepare(const CascadeSpec& spec) const;
  // Decode, filter, re-encode. Untouched when no filter is set or it does
  // not trigger.
  TokenSeq transform(const TokenSeq& x, bool* triggered = nullptr) const;
};

struct DefenseSample {
  int sample_id = 0;
  TokenSeq clean_input;
  TokenSeq attacked_input;
  bool attack_succeeded = false;  // pre-defense outcome differed from clean
};

struct DefenseOutcome {
  double dsr = 0.0;
  double odr = 0.0;
  std::size_t successful_attacks = 0;
  std::size_t restored = 0;
  std::size_t clean_samples = 0;
  std::size_t clean_changed = 0;
  std::size_t attacked_triggered = 0;
  std::size_t clean_triggered = 0;
};

// DSR: successful attacks whose defended outcome (final output, τ) equals the
// undefended clean outcome. ODR: clean samples whose defended outcome differs
// from the undefended one. Throws IntegrityError on duplicate sample ids.
DefenseOutcome defense_eval(std::span<const DefenseSample> samples, const Defense& defense,
                            const CascadeSpec& spec, std::size_t threads = 1);

// Pairs clean and attacked inputs by id; throws IntegrityError on mismatch.
std::vector<DefenseSample> pair_samples(std::span<const std::pair<int, TokenSeq>> clean,
                                        std::span<const std::pair<int, TokenSeq>> attacked,
                                        std::span<const bool> attack_succeeded);

struct DefenseRow {
  std::string attack;
  std::string kind;
  double strength = 0.0;
  std::size_t trim = 0;
  std::optional<double> pass_rate;  // joint attacks only
  DefenseOutcome outcome;
};

std::string defense_csv(const std::vector<DefenseRow>& rows);

}  // namespace cascade::defense
