#include <cstdio>
#include <map>
#include <set>

#include "cascade/defense/defense.hpp"
#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"

namespace cascade::defense {

CascadeSpec Defense::prepare(const CascadeSpec& spec) const {
  return smoothing ? smooth_cascade(spec, *smoothing) : spec;
}

TokenSeq Defense::transform(const TokenSeq& x, bool* triggered) const {
  if (triggered) *triggered = false;
  if (!filter) return x;
  if (!vocab) throw ConfigError("text filters need a vocabulary");
  const FilterResult r = filter->apply(zoo::decode(*vocab, x));
  if (triggered) *triggered = r.triggered;
  return r.triggered ? zoo::encode(*vocab, r.text) : x;
}

namespace {

struct Outcome {
  Label output;
  int stop = 0;
  bool operator==(const Outcome&) const = default;
};

Outcome outcome_of(const CascadeSpec& spec, const TokenSeq& x) {
  const ExecutionTrace t = run_cascade(spec, x);
  return Outcome{t.final_output, t.stopping_index};
}

}  // namespace

DefenseOutcome defense_eval(std::span<const DefenseSample> samples, const Defense& defense,
                            const CascadeSpec& spec, std::size_t threads) {
  std::set<int> ids;
  for (const auto& s : samples) {
    if (!ids.insert(s.sample_id).second) {
      throw IntegrityError("defense_eval: duplicate sample id " + std::to_string(s.sample_id));
    }
  }
  const CascadeSpec defended = defense.prepare(spec);

  struct PerSample {
    bool restored = false;
    bool changed = false;
    bool attacked_triggered = false;
    bool clean_triggered = false;
  };
  const auto results = parallel_map(samples.size(), threads, [&](std::size_t k) {
    const auto& s = samples[k];
    PerSample r;
    const Outcome clean = outcome_of(spec, s.clean_input);
    const Outcome clean_def = outcome_of(defended, defense.transform(s.clean_input, &r.clean_triggered));
    r.changed = !(clean_def == clean);
    if (s.attack_succeeded) {
      const Outcome adv_def =
          outcome_of(defended, defense.transform(s.attacked_input, &r.attacked_triggered));
      r.restored = adv_def == clean;
    }
    return r;
  });

  DefenseOutcome out;
  out.clean_samples = samples.size();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& r = results[k];
    if (samples[k].attack_succeeded) {
      ++out.successful_attacks;
      out.restored += r.restored ? 1 : 0;
      out.attacked_triggered += r.attacked_triggered ? 1 : 0;
    }
    out.clean_changed += r.changed ? 1 : 0;
    out.clean_triggered += r.clean_triggered ? 1 : 0;
  }
  out.dsr = out.successful_attacks ? static_cast<double>(out.restored) / static_cast<double>(out.successful_attacks) : 0.0;
  out.odr = out.clean_samples ? static_cast<double>(out.clean_changed) / static_cast<double>(out.clean_samples) : 0.0;
  return out;
}

std::vector<DefenseSample> pair_samples(std::span<const std::pair<int, TokenSeq>> clean,
                                        std::span<const std::pair<int, TokenSeq>> attacked,
                                        std::span<const bool> attack_succeeded) {
  if (attacked.size() != attack_succeeded.size()) {
    throw IntegrityError("pair_samples: one success flag per attacked sample is required");
  }
  std::map<int, std::size_t> adv;
  for (std::size_t k = 0; k < attacked.size(); ++k) {
    if (!adv.emplace(attacked[k].first, k).second) {
      throw IntegrityError("pair_samples: duplicate attacked id " + std::to_string(attacked[k].first));
    }
  }
  if (adv.size() != clean.size()) {
    throw IntegrityError("pair_samples: " + std::to_string(clean.size()) + " clean samples vs " +
                         std::to_string(adv.size()) + " attacked");
  }
  std::vector<DefenseSample> out;
  for (const auto& [id, x] : clean) {
    auto it = adv.find(id);
    if (it == adv.end()) throw IntegrityError("pair_samples: clean id " + std::to_string(id) + " has no attacked pair");
    out.push_back(DefenseSample{id, x, attacked[it->second].second, attack_succeeded[it->second]});
  }
  return out;
}

std::string defense_csv(const std::vector<DefenseRow>& rows) {
  std::string out = "attack,kind,strength,trim,pass_rate,dsr,odr\n";
  char buf[160];
  for (const auto& r : rows) {
    std::string p;
    if (r.pass_rate) {
      std::snprintf(buf, sizeof buf, "%.2f", *r.pass_rate);
      p = buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6g,%zu,%s,%.4f,%.4f\n", r.strength, r.trim, p.c_str(),
                  r.outcome.dsr, r.outcome.odr);
    out += r.attack + "," + r.kind + buf;
  }
  return out;
}

}  // namespace cascade::defense
