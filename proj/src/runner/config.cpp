#include "cascade/runner/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "cascade/errors.hpp"

namespace cascade::runner {

using nlohmann::json;

namespace {

// Reads fields of one object, collecting problems instead of stopping at the
// first one.
class Fields {
 public:
  Fields(const json& j, std::string where, std::vector<std::string>& errors)
      : j_(j), where_(std::move(where)), errors_(errors) {
    if (!j_.is_object()) errors_.push_back(where_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  template <class T>
  bool get(const char* key, T& out, bool required = false) {
    known_.insert(key);
    if (!has(key)) {
      if (required) errors_.push_back(path(key) + ": missing");
      return false;
    }
    try {
      out = j_.at(key).get<T>();
      return true;
    } catch (const json::exception&) {
      errors_.push_back(path(key) + ": wrong type (" + std::string(j_.at(key).type_name()) + ")");
      return false;
    }
  }

  const json* sub(const char* key) {
    known_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }

  void error(const char* key, const std::string& msg) { errors_.push_back(path(key) + ": " + msg); }

  void reject_unknown() {
    if (!j_.is_object()) return;
    for (const auto& [k, _] : j_.items()) {
      if (!known_.count(k)) errors_.push_back(path(k.c_str()) + ": unknown field");
    }
  }

  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

const std::set<std::string> kModes = {"random_noise", "single_acc", "single_cost", "dm_flip", "joint"};
const std::set<std::string> kDefenseKinds = {"ppl", "regex", "cpt", "smoothing"};

void read_attackable(const json& j, zoo::AttackableProfile& p, std::vector<std::string>& errors) {
  Fields f(j, "cascade.profile", errors);
  f.get("corpus_size", p.corpus_size);
  f.get("class_count", p.class_count);
  f.get("stages", p.stages);
  f.get("words_per_sample", p.words_per_sample);
  f.get("content_words", p.content_words);
  f.get("attack_tokens", p.attack_tokens);
  f.get("topic_purity", p.topic_purity);
  f.get("signal", p.signal);
  f.get("noise", p.noise);
  f.get("attack_sensitivity", p.attack_sensitivity);
  f.get("decider_bias", p.decider_bias);
  f.get("decider_margin_weight", p.decider_margin_weight);
  f.get("decider_threshold", p.decider_threshold);
  f.get("decider_attack_scale", p.decider_attack_scale);
  f.get("decider_anomaly", p.decider_anomaly);
  f.reject_unknown();
  if (p.stages < 2) f.error("stages", "must be at least 2");
  if (p.class_count < 2) f.error("class_count", "must be at least 2");
  if (p.corpus_size == 0) f.error("corpus_size", "must be positive");
  if (!(p.topic_purity >= 0.0 && p.topic_purity <= 1.0)) f.error("topic_purity", "must lie in [0, 1]");
  if (!(p.decider_threshold >= 0.0 && p.decider_threshold <= 1.0)) f.error("decider_threshold", "must lie in [0, 1]");
  const auto stages = static_cast<std::size_t>(std::max(p.stages, 0));
  if (p.signal.size() != stages) f.error("signal", "needs one entry per stage");
  if (p.noise.size() != stages) f.error("noise", "needs one entry per stage");
  if (p.attack_sensitivity.size() != stages) f.error("attack_sensitivity", "needs one entry per stage");
}

json attackable_to_json(const zoo::AttackableProfile& p) {
  return json{{"corpus_size", p.corpus_size},
              {"class_count", p.class_count},
              {"stages", p.stages},
              {"words_per_sample", p.words_per_sample},
              {"content_words", p.content_words},
              {"attack_tokens", p.attack_tokens},
              {"topic_purity", p.topic_purity},
              {"signal", p.signal},
              {"noise", p.noise},
              {"attack_sensitivity", p.attack_sensitivity},
              {"decider_bias", p.decider_bias},
              {"decider_margin_weight", p.decider_margin_weight},
              {"decider_threshold", p.decider_threshold},
              {"decider_attack_scale", p.decider_attack_scale},
              {"decider_anomaly", p.decider_anomaly}};
}

void read_planted(const json& j, zoo::PlantedProfile& p, std::vector<std::string>& errors) {
  Fields f(j, "cascade.profile", errors);
  f.get("stages", p.stages);
  f.get("class_count", p.class_count);
  f.get("corpus_size", p.corpus_size);
  f.get("words_per_sample", p.words_per_sample);
  f.get("route_fractions", p.route_fractions, true);
  f.get("accuracy", p.accuracy, true);
  f.reject_unknown();
  if (p.stages < 1) f.error("stages", "must be at least 1");
  if (p.class_count < 2) f.error("class_count", "must be at least 2");
}

json planted_to_json(const zoo::PlantedProfile& p) {
  return json{{"stages", p.stages},
              {"class_count", p.class_count},
              {"corpus_size", p.corpus_size},
              {"words_per_sample", p.words_per_sample},
              {"route_fractions", p.route_fractions},
              {"accuracy", p.accuracy}};
}

void read_attack(const json& j, AttackSection& a, std::vector<std::string>& errors) {
  Fields f(j, "attack", errors);
  f.get("modes", a.modes, true);
  f.get("targets", a.targets);
  f.get("rounds", a.rounds);
  f.get("slots_per_phase", a.slots_per_phase);
  f.get("iterations", a.iterations);
  f.get("candidate_pool", a.candidate_pool);
  f.get("substitutions", a.substitutions);
  std::string backend = attack::to_string(a.backend);
  if (f.get("backend", backend)) {
    try {
      a.backend = attack::backend_from_string(backend);
    } catch (const ConfigError& e) {
      f.error("backend", e.what());
    }
  }
  std::string loss = attack::to_string(a.loss);
  if (f.get("loss", loss)) {
    try {
      a.loss = attack::loss_kind_from_string(loss);
    } catch (const ConfigError& e) {
      f.error("loss", e.what());
    }
  }
  f.get("pass_rates", a.pass_rates);
  f.get("attack_vocab", a.attack_vocab);
  f.get("max_samples", a.max_samples);
  f.reject_unknown();

  std::set<std::string> seen;
  for (const auto& m : a.modes) {
    if (!kModes.count(m)) f.error("modes", "unknown mode '" + m + "'");
    if (!seen.insert(m).second) f.error("modes", "duplicate mode '" + m + "'");
  }
  if (a.targets.empty()) f.error("targets", "must not be empty");
  for (int t : a.targets) {
    if (t < 1) f.error("targets", "stage indices start at 1");
  }
  if (a.rounds == 0) f.error("rounds", "must be positive");
  if (a.slots_per_phase == 0) f.error("slots_per_phase", "must be positive");
  if (a.iterations == 0) f.error("iterations", "must be positive");
  if (a.candidate_pool == 0) f.error("candidate_pool", "must be positive");
  for (double p : a.pass_rates) {
    if (!(p >= 0.0 && p <= 1.0)) f.error("pass_rates", "values must lie in [0, 1]");
  }
  if (seen.count("joint") && a.pass_rates.empty()) f.error("pass_rates", "joint mode needs at least one pass rate");
}

json attack_to_json(const AttackSection& a) {
  return json{{"modes", a.modes},
              {"targets", a.targets},
              {"rounds", a.rounds},
              {"slots_per_phase", a.slots_per_phase},
              {"iterations", a.iterations},
              {"candidate_pool", a.candidate_pool},
              {"substitutions", a.substitutions},
              {"backend", attack::to_string(a.backend)},
              {"loss", attack::to_string(a.loss)},
              {"pass_rates", a.pass_rates},
              {"attack_vocab", a.attack_vocab},
              {"max_samples", a.max_samples}};
}

void read_defense(const json& j, std::size_t index, DefenseEntry& d, std::vector<std::string>& errors) {
  Fields f(j, "defense[" + std::to_string(index) + "]", errors);
  f.get("kind", d.kind, true);
  f.get("strengths", d.strengths, true);
  f.get("trim", d.trim);
  f.get("n_draws", d.n_draws);
  f.reject_unknown();
  if (!d.kind.empty() && !kDefenseKinds.count(d.kind)) f.error("kind", "unknown defense '" + d.kind + "'");
  if (f.has("strengths") && d.strengths.empty()) f.error("strengths", "must not be empty");
  for (double s : d.strengths) {
    bool ok = true;
    if (d.kind == "ppl") ok = s > 0.0 && s <= 1.0;
    if (d.kind == "regex") ok = s >= 0.0 && s <= 1.0;
    if (d.kind == "cpt") ok = s > 0.0;
    if (d.kind == "smoothing") ok = s >= 0.0 && std::isfinite(s);
    if (!ok) f.error("strengths", "value " + std::to_string(s) + " out of range for " + d.kind);
  }
  if (d.kind == "smoothing" && d.n_draws == 0) f.error("n_draws", "must be positive");
}

json defense_to_json(const DefenseEntry& d) {
  json j{{"kind", d.kind}, {"strengths", d.strengths}, {"trim", d.trim}};
  if (d.kind == "smoothing") j["n_draws"] = d.n_draws;
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  std::vector<std::string> errors;
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  Fields f(j, "", errors);
  if (f.get("schema", cfg.schema, true) && cfg.schema != kSchema) {
    f.error("schema", "expected '" + std::string(kSchema) + "', got '" + cfg.schema + "'");
  }
  if (f.has("seed") && !(j.at("seed").is_number_unsigned() ||
                          (j.at("seed").is_number_integer() && j.at("seed").get<std::int64_t>() >= 0))) {
    f.error("seed", "must be a non-negative integer");
    f.sub("seed");
  } else {
    f.get("seed", cfg.seed, true);
  }
  f.get("output_dir", cfg.output_dir);

  if (const json* c = f.sub("cascade")) {
    Fields cf(*c, "cascade", errors);
    cf.get("generator", cfg.cascade.generator);
    const json* profile = cf.sub("profile");
    if (cfg.cascade.generator == "attackable") {
      if (profile) read_attackable(*profile, cfg.cascade.attackable, errors);
    } else if (cfg.cascade.generator == "planted") {
      if (profile) {
        read_planted(*profile, cfg.cascade.planted, errors);
      } else {
        cf.error("profile", "planted cascades need a profile");
      }
    } else if (cfg.cascade.generator == "document") {
      const json* doc = cf.sub("document");
      cf.get("file", cfg.cascade.file);
      if (doc) cfg.cascade.document = *doc;
      if (!doc && cfg.cascade.file.empty()) cf.error("document", "needs an inline document or a file");
    } else {
      cf.error("generator", "unknown generator '" + cfg.cascade.generator + "'");
    }
    cf.reject_unknown();
  } else {
    f.error("cascade", "missing");
  }

  if (const json* c = f.sub("corpus")) {
    Fields cf(*c, "corpus", errors);
    cf.get("file", cfg.corpus_file, true);
    cf.reject_unknown();
  }
  if (const json* a = f.sub("attack")) {
    cfg.attack.emplace();
    read_attack(*a, *cfg.attack, errors);
  }
  if (const json* d = f.sub("defense")) {
    if (!d->is_array()) {
      f.error("defense", "expected an array");
    } else {
      for (std::size_t i = 0; i < d->size(); ++i) {
        DefenseEntry e;
        read_defense((*d)[i], i, e, errors);
        cfg.defense.push_back(std::move(e));
      }
      if (!cfg.defense.empty() && !cfg.attack) f.error("defense", "defenses need an attack section");
    }
  }
  f.reject_unknown();

  if (!errors.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const ExperimentConfig& cfg) {
  json c{{"generator", cfg.cascade.generator}};
  if (cfg.cascade.generator == "attackable") c["profile"] = attackable_to_json(cfg.cascade.attackable);
  if (cfg.cascade.generator == "planted") c["profile"] = planted_to_json(cfg.cascade.planted);
  if (cfg.cascade.generator == "document") {
    if (!cfg.cascade.document.is_null()) c["document"] = cfg.cascade.document;
    if (!cfg.cascade.file.empty()) c["file"] = cfg.cascade.file;
  }
  json j{{"schema", cfg.schema}, {"seed", cfg.seed}, {"output_dir", cfg.output_dir}, {"cascade", std::move(c)}};
  if (!cfg.corpus_file.empty()) j["corpus"] = {{"file", cfg.corpus_file}};
  if (cfg.attack) j["attack"] = attack_to_json(*cfg.attack);
  if (!cfg.defense.empty()) {
    json d = json::array();
    for (const auto& e : cfg.defense) d.push_back(defense_to_json(e));
    j["defense"] = std::move(d);
  }
  return j;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  std::filesystem::path p(cfg.output_dir.empty() ? std::string("experiment") : cfg.output_dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return std::filesystem::path(root) / p;
  return p;
}

}  // namespace cascade::runner
