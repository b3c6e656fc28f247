#include <algorithm>
#include <cctype>
#include <cmath>

#include "cascade/defense/defense.hpp"
#include "cascade/errors.hpp"

namespace cascade::defense {

std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::ppl: return "ppl";
    case FilterKind::regex: return "regex";
    case FilterKind::cpt: return "cpt";
  }
  return "regex";
}

FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "ppl") return FilterKind::ppl;
  if (s == "regex") return FilterKind::regex;
  if (s == "cpt") return FilterKind::cpt;
  throw ConfigError("unknown filter kind '" + s + "'");
}

void FilterConfig::validate() const {
  switch (kind) {
    case FilterKind::ppl:
      if (!(strength > 0.0 && strength <= 1.0)) throw ConfigError("ppl quantile must lie in (0, 1]");
      break;
    case FilterKind::regex:
      if (!(strength >= 0.0 && strength <= 1.0)) throw ConfigError("regex ratio must lie in [0, 1]");
      break;
    case FilterKind::cpt:
      if (!(strength > 0.0)) throw ConfigError("cpt threshold must be positive");
      break;
  }
}

void SmoothingConfig::validate() const {
  if (!(sigma >= 0.0) || std::isinf(sigma)) throw ConfigError("smoothing sigma must be finite and >= 0");
  if (n_draws == 0) throw ConfigError("smoothing needs at least one draw");
}

std::string trim_tail_words(std::string_view text, std::size_t n) {
  auto words = zoo::split_words(text);
  words.resize(words.size() > n ? words.size() - n : 0);
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

double special_char_ratio(std::string_view text) {
  if (text.empty()) return 0.0;
  std::size_t special = 0;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (!std::isalnum(c) && !std::isspace(c)) ++special;
  }
  return static_cast<double>(special) / static_cast<double>(text.size());
}

double chars_per_token(std::string_view text, const zoo::Vocabulary& vocab) {
  const std::size_t tokens = zoo::encode(vocab, text).size();
  return tokens == 0 ? 0.0 : static_cast<double>(text.size()) / static_cast<double>(tokens);
}

TextFilter TextFilter::regex(FilterConfig cfg) {
  if (cfg.kind != FilterKind::regex) throw ConfigError("regex filter needs kind regex");
  cfg.validate();
  TextFilter f(cfg);
  f.threshold_ = cfg.strength;
  return f;
}

TextFilter TextFilter::cpt(FilterConfig cfg, std::shared_ptr<const zoo::Vocabulary> vocab) {
  if (cfg.kind != FilterKind::cpt) throw ConfigError("cpt filter needs kind cpt");
  if (!vocab) throw ConfigError("cpt filter needs a vocabulary");
  cfg.validate();
  TextFilter f(cfg);
  f.threshold_ = cfg.strength;
  f.vocab_ = std::move(vocab);
  return f;
}

TextFilter TextFilter::ppl(FilterConfig cfg, std::shared_ptr<const BigramModel> model,
                           std::span<const std::string> clean_texts) {
  if (cfg.kind != FilterKind::ppl) throw ConfigError("ppl filter needs kind ppl");
  if (!model) throw ConfigError("ppl filter needs a reference model");
  cfg.validate();
  std::vector<double> ppls;
  for (const auto& t : clean_texts) {
    const double p = model->perplexity(t);
    if (!std::isnan(p)) ppls.push_back(p);
  }
  if (ppls.empty()) throw ConfigError("ppl filter needs non-empty clean texts");
  std::sort(ppls.begin(), ppls.end());
  const auto rank = static_cast<std::size_t>(std::ceil(cfg.strength * static_cast<double>(ppls.size())));
  TextFilter f(cfg);
  f.threshold_ = ppls[std::clamp<std::size_t>(rank, 1, ppls.size()) - 1];
  f.model_ = std::move(model);
  return f;
}

bool TextFilter::triggers(std::string_view text) const {
  switch (cfg_.kind) {
    case FilterKind::regex:
      return special_char_ratio(text) > threshold_;
    case FilterKind::cpt: {
      const std::size_t tokens = zoo::encode(*vocab_, text).size();
      return tokens > 0 && chars_per_token(text, *vocab_) > threshold_;
    }
    case FilterKind::ppl: {
      const double p = model_->perplexity(text);
      return !std::isnan(p) && p > threshold_;
    }
  }
  return false;
}

FilterResult TextFilter::apply(std::string_view text) const {
  FilterResult r;
  r.triggered = triggers(text);
  r.text = r.triggered ? trim_tail_words(text, cfg_.trim) : std::string(text);
  return r;
}

FilterResult regex_filter(std::string_view text, const FilterConfig& cfg) {
  return TextFilter::regex(cfg).apply(text);
}

FilterResult cpt_filter(std::string_view text, const zoo::Vocabulary& vocab, const FilterConfig& cfg) {
  // Non-owning alias; the filter does not outlive this call.
  std::shared_ptr<const zoo::Vocabulary> v(&vocab, [](const zoo::Vocabulary*) {});
  return TextFilter::cpt(cfg, std::move(v)).apply(text);
}

}  // namespace cascade::defense
