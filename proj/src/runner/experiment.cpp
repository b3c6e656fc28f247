#include "cascade/runner/experiment.hpp"

#include <cstdio>
#include <set>

#include "cascade/attack/report_io.hpp"
#include "cascade/defense/defense.hpp"
#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"
#include "cascade/rng.hpp"
#include "cascade/runner/atomic_file.hpp"
#include "cascade/runner/spec_io.hpp"
#include "cascade/runner/summary.hpp"
#include "cascade/trace_io.hpp"
#include "cascade/zoo/planted.hpp"

namespace cascade::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseTag = 0x6e6f697365ULL;

std::vector<TokenId> non_special_ids(const zoo::Vocabulary& v) {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    if (id != v.unk_id() && id != v.pad_id()) out.push_back(id);
  }
  return out;
}

std::string run_name(const std::string& mode, std::optional<double> p) {
  if (!p) return mode;
  char buf[32];
  std::snprintf(buf, sizeof buf, "_p%.2f", *p);
  return mode + buf;
}

attack::AttackMode mode_of(const std::string& mode) { return attack::attack_mode_from_string(mode); }

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  std::optional<BuiltExperiment> b;
  const auto& src = cfg.cascade;
  if (src.generator == "attackable") {
    auto a = zoo::make_attackable_cascade(src.attackable, cfg.seed);
    b.emplace(BuiltExperiment{std::make_shared<zoo::Vocabulary>(std::move(a.vocab)), std::move(a.spec),
                              std::move(a.corpus), std::move(a.attack_vocab)});
  } else if (src.generator == "planted") {
    auto p = zoo::make_planted_cascade(src.planted, cfg.seed);
    auto vocab = std::make_shared<zoo::Vocabulary>(std::move(p.vocab));
    auto ids = non_special_ids(*vocab);
    b.emplace(BuiltExperiment{std::move(vocab), std::move(p.spec), std::move(p.corpus), std::move(ids)});
  } else if (src.generator == "document") {
    json doc = src.document;
    if (doc.is_null()) {
      fs::path p = src.file;
      if (p.is_relative()) p = cfg.base_dir / p;
      try {
        doc = read_json(p);
      } catch (const IntegrityError& e) {
        throw ConfigError(e.what());
      }
    }
    LoadedCascade loaded = cascade_from_json(doc, cfg.base_dir);
    if (cfg.corpus_file.empty()) throw ConfigError("document cascades need a corpus file");
    auto ids = non_special_ids(*loaded.vocab);
    b.emplace(BuiltExperiment{loaded.vocab, std::move(loaded.spec), {}, std::move(ids)});
  } else {
    throw ConfigError("unknown generator '" + src.generator + "'");
  }

  if (!cfg.corpus_file.empty()) {
    fs::path p = cfg.corpus_file;
    if (p.is_relative()) p = cfg.base_dir / p;
    b->corpus = zoo::read_corpus_jsonl(p, *b->vocab);
  }
  if (cfg.attack) {
    const auto& a = *cfg.attack;
    if (a.max_samples > 0 && b->corpus.samples.size() > a.max_samples) b->corpus.samples.resize(a.max_samples);
    if (!a.attack_vocab.empty()) {
      b->attack_vocab.clear();
      for (const auto& s : a.attack_vocab) {
        if (!b->vocab->contains(s)) throw ConfigError("attack.attack_vocab: '" + s + "' is not in the vocabulary");
        b->attack_vocab.push_back(b->vocab->id(s));
      }
    }
    for (int t : a.targets) {
      if (t < 1 || t >= b->spec.stage_count()) {
        throw ConfigError("attack.targets: stage " + std::to_string(t) + " outside 1.." +
                          std::to_string(b->spec.stage_count() - 1));
      }
    }
  }
  if (b->corpus.samples.empty()) throw ConfigError("experiment corpus is empty");
  for (const auto& s : b->corpus.samples) s.input.validate(b->spec.vocab_size(), b->spec.max_sequence_length());
  return std::move(*b);
}

EvaluatedSet evaluate_inputs(const BuiltExperiment& b, const std::vector<TokenSeq>& inputs,
                             std::size_t threads) {
  const auto& samples = b.corpus.samples;
  if (inputs.size() != samples.size()) throw IntegrityError("evaluate_inputs: one input per sample is required");
  const int l = b.spec.stage_count();
  struct One {
    ExecutionTrace trace;
    Label final_pred;
  };
  auto results = parallel_map(inputs.size(), threads, [&](std::size_t k) {
    One o{run_cascade(b.spec, inputs[k]), {}};
    o.final_pred = o.trace.stopping_index == l ? o.trace.final_output
                                               : b.spec.stage(l).predict(inputs[k]).prediction;
    return o;
  });
  EvaluatedSet out;
  std::vector<Label> labels;
  std::vector<std::size_t> lengths;
  for (std::size_t k = 0; k < results.size(); ++k) {
    out.records.push_back(analysis::routing_record(results[k].trace, samples[k].id, samples[k].label,
                                                   results[k].final_pred));
    out.traces.push_back(std::move(results[k].trace));
    out.final_stage_predictions.push_back(std::move(results[k].final_pred));
    labels.push_back(samples[k].label);
    lengths.push_back(std::max<std::size_t>(samples[k].input.size(), 1));
  }
  out.metrics = metrics::metric_report(out.traces, labels, lengths, b.vocab.get());
  return out;
}

attack::AttackConfig make_attack_config(const AttackSection& a, const std::string& mode,
                                        double pass_rate, std::uint64_t seed,
                                        const BuiltExperiment& b) {
  attack::AttackConfig c;
  c.mode = mode_of(mode);
  c.target_stages = a.targets;
  c.neighborhood.suffix_slots_per_phase = a.slots_per_phase;
  c.neighborhood.rounds = a.rounds;
  c.neighborhood.candidate_pool_size = a.candidate_pool;
  c.neighborhood.substitutions_per_iteration = a.substitutions;
  c.neighborhood.attack_vocab = b.attack_vocab;
  c.iterations_per_phase = a.iterations;
  c.pass_rate = pass_rate;
  c.seed = seed;
  c.backend = a.backend;
  c.loss = a.loss;
  c.validate_against(b.spec);
  return c;
}

AttackRun run_attack_mode(const BuiltExperiment& b, const AttackSection& a, const std::string& mode,
                          std::optional<double> pass_rate, std::uint64_t seed, std::size_t threads) {
  const auto& samples = b.corpus.samples;
  AttackRun run;
  run.name = run_name(mode, pass_rate);
  run.mode = mode;
  run.pass_rate = pass_rate;

  struct One {
    TokenSeq adversarial;
    TokenSeq suffix;
    json report;
  };
  std::vector<One> results;
  if (mode == "random_noise") {
    const std::size_t length = 2 * a.rounds * a.slots_per_phase;
    if (b.attack_vocab.empty()) throw ConfigError("random_noise needs a non-empty attack vocabulary");
    results = parallel_map(samples.size(), threads, [&](std::size_t k) {
      const auto& s = samples[k];
      const TokenSeq suffix = zoo::random_suffix(
          b.attack_vocab, length, stream_key({seed, kNoiseTag, static_cast<std::uint64_t>(s.id)}));
      json report{{"sample_id", s.id},
                  {"mode", "random_noise"},
                  {"per_round", json::array()},
                  {"suffix_tokens", suffix.tokens()},
                  {"suffix_text", zoo::decode(*b.vocab, suffix)}};
      return One{concat(s.input, suffix), suffix, std::move(report)};
    });
  } else {
    const attack::AttackConfig cfg = make_attack_config(a, mode, pass_rate.value_or(1.0), seed, b);
    results = parallel_map(samples.size(), threads, [&](std::size_t k) {
      const auto& s = samples[k];
      attack::AttackResult r = attack::run_attack(s.input, s.label, b.spec, cfg, s.id);
      json report = attack::report_to_json(r.report, b.vocab.get());
      if (pass_rate) report["pass_rate"] = *pass_rate;
      return One{std::move(r.adversarial), r.report.suffix.assembled(), std::move(report)};
    });
  }
  for (auto& r : results) {
    run.adversarial.push_back(std::move(r.adversarial));
    run.suffixes.push_back(std::move(r.suffix));
    run.reports.push_back(std::move(r.report));
  }
  run.eval = evaluate_inputs(b, run.adversarial, threads);
  return run;
}

json trace_line(const ExecutionTrace& trace, const zoo::Sample& sample, std::size_t query_length,
                const Label& final_stage_prediction) {
  json j = trace_to_json(trace, sample.id);
  j["label"] = label_to_json(sample.label);
  j["query_length"] = query_length;
  j["final_stage_prediction"] = label_to_json(final_stage_prediction);
  j["normalized_token_cost"] = metrics::normalized_token_cost(trace, query_length);
  return j;
}

std::vector<analysis::RoutingRecord> records_from_trace_lines(const std::vector<json>& lines) {
  std::vector<analysis::RoutingRecord> out;
  for (const auto& j : lines) {
    try {
      const ExecutionTrace t = trace_from_json(j);
      out.push_back(analysis::routing_record(t, j.at("sample_id").get<int>(), label_from_json(j.at("label")),
                                             label_from_json(j.at("final_stage_prediction"))));
    } catch (const json::exception& e) {
      throw IntegrityError(std::string("trace line lacks routing fields: ") + e.what());
    }
  }
  return out;
}

namespace {

void write_eval(const fs::path& dir, const BuiltExperiment& b, const EvaluatedSet& e) {
  std::vector<json> lines;
  const auto& samples = b.corpus.samples;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    lines.push_back(trace_line(e.traces[k], samples[k], std::max<std::size_t>(samples[k].input.size(), 1),
                               e.final_stage_predictions[k]));
  }
  write_jsonl_atomic(dir / "traces.jsonl", lines);
  write_json_atomic(dir / "metrics.json", metrics::report_to_json(e.metrics));
  write_json_atomic(dir / "decomposition.json",
                    analysis::decomposition_to_json(analysis::decomposition(e.records)));
}

struct Outcome {
  Label output;
  int stop = 0;
  bool operator==(const Outcome&) const = default;
};

std::vector<defense::DefenseRow> run_defenses(const ExperimentConfig& cfg, const BuiltExperiment& b,
                                              const EvaluatedSet& clean,
                                              const std::vector<AttackRun>& runs, std::size_t threads) {
  const auto& samples = b.corpus.samples;
  std::vector<std::string> clean_texts;
  for (const auto& s : samples) clean_texts.push_back(zoo::decode(*b.vocab, s.input));
  std::shared_ptr<const defense::BigramModel> bigram;

  std::vector<defense::DefenseRow> rows;
  for (const auto& entry : cfg.defense) {
    for (double strength : entry.strengths) {
      defense::Defense d;
      d.vocab = b.vocab;
      if (entry.kind == "smoothing") {
        d.smoothing = defense::SmoothingConfig{strength, entry.n_draws, cfg.seed};
      } else {
        defense::FilterConfig fc{defense::filter_kind_from_string(entry.kind), strength, entry.trim};
        if (fc.kind == defense::FilterKind::regex) d.filter = defense::TextFilter::regex(fc);
        if (fc.kind == defense::FilterKind::cpt) d.filter = defense::TextFilter::cpt(fc, b.vocab);
        if (fc.kind == defense::FilterKind::ppl) {
          if (!bigram) bigram = std::make_shared<defense::BigramModel>(defense::BigramModel::fit(clean_texts));
          d.filter = defense::TextFilter::ppl(fc, bigram, clean_texts);
        }
      }
      for (const auto& run : runs) {
        std::vector<defense::DefenseSample> ds;
        for (std::size_t k = 0; k < samples.size(); ++k) {
          const Outcome c{clean.traces[k].final_output, clean.traces[k].stopping_index};
          const Outcome a{run.eval.traces[k].final_output, run.eval.traces[k].stopping_index};
          ds.push_back(defense::DefenseSample{samples[k].id, samples[k].input, run.adversarial[k], !(a == c)});
        }
        defense::DefenseRow row;
        row.attack = run.name;
        row.kind = entry.kind;
        row.strength = strength;
        row.trim = entry.kind == "smoothing" ? 0 : entry.trim;
        row.pass_rate = run.pass_rate;
        row.outcome = defense::defense_eval(ds, d, b.spec, threads);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace

fs::path run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const fs::path dir = opts.output_dir ? *opts.output_dir : resolve_output_dir(cfg);
  const BuiltExperiment b = build_experiment(cfg);
  fs::create_directories(dir);
  // Outputs of an earlier run in the same directory would mix into the summary.
  for (const char* stale : {"clean", "attacks", "defense.csv", "summary.md"}) fs::remove_all(dir / stale);
  write_json_atomic(dir / "config.json", config_to_json(cfg));

  std::vector<TokenSeq> clean_inputs;
  for (const auto& s : b.corpus.samples) clean_inputs.push_back(s.input);
  const EvaluatedSet clean = evaluate_inputs(b, clean_inputs, opts.threads);
  write_eval(dir / "clean", b, clean);
  json kinds = json::array();
  for (const auto& f : b.spec.stages()) kinds.push_back(f->kind());
  // remote stages make the directory depend on something outside the config
  write_json_atomic(dir / "clean" / "cascade.json",
                    json{{"stage_kinds", std::move(kinds)}, {"deterministic", b.spec.deterministic()}});

  std::vector<AttackRun> runs;
  if (opts.attacks && cfg.attack && !cfg.attack->modes.empty()) {
    const auto& a = *cfg.attack;
    json index = json::array();
    for (const auto& mode : a.modes) {
      std::vector<std::optional<double>> ps;
      if (mode == "joint") {
        for (double p : a.pass_rates) ps.emplace_back(p);
      } else {
        ps.emplace_back(std::nullopt);
      }
      for (const auto& p : ps) {
        AttackRun run = run_attack_mode(b, a, mode, p, cfg.seed, opts.threads);
        const fs::path rd = dir / "attacks" / run.name;
        write_eval(rd, b, run.eval);
        write_jsonl_atomic(rd / "reports.jsonl", run.reports);
        json suffixes = json::array();
        for (std::size_t k = 0; k < run.suffixes.size(); ++k) {
          suffixes.push_back(json{{"sample_id", b.corpus.samples[k].id},
                                  {"tokens", run.suffixes[k].tokens()},
                                  {"text", zoo::decode(*b.vocab, run.suffixes[k])}});
        }
        write_json_atomic(rd / "suffixes.json",
                          json{{"attack", run.name}, {"universal", false}, {"suffixes", std::move(suffixes)}});
        write_json_atomic(rd / "gap_shift.json",
                          analysis::gap_shift_to_json(analysis::gap_shift(clean.records, run.eval.records)));
        index.push_back(json{{"name", run.name}, {"mode", run.mode},
                             {"pass_rate", run.pass_rate ? json(*run.pass_rate) : json(nullptr)}});
        runs.push_back(std::move(run));
      }
    }
    write_json_atomic(dir / "attacks" / "index.json", index);
  }

  if (opts.defense && !cfg.defense.empty() && !runs.empty()) {
    write_file_atomic(dir / "defense.csv", defense::defense_csv(run_defenses(cfg, b, clean, runs, opts.threads)));
  }
  write_file_atomic(dir / "summary.md", render_summary(dir));
  return dir;
}

}  // namespace cascade::runner
